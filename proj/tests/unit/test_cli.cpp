#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "gtl/cli.hpp"
#include "gtl/io.hpp"
#include "support.hpp"

using namespace gtl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("gtl_cli_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gtl");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

json blobs_config(std::size_t epochs) {
    json j = json::parse(R"({
      "schema_version": 1,
      "dataset": {"kind": "blobs", "seed": 3, "n_classes": 2, "per_class": 100, "dim": 2},
      "architecture": {"type": "resnet", "stage_widths": [8], "blocks_per_stage": 5},
      "train": {"lr": 0.005, "batch_size": 16, "seed": 1, "ot_subsample": 64, "eval_subset": 64},
      "output": {"dir": "unused"}
    })");
    j["train"]["epochs"] = epochs;
    return j;
}

std::string write_config(const TempDir& dir, const json& j, const std::string& name = "run.json") {
    const std::string path = dir.file(name);
    write_file_atomic(path, dump_json(j));
    return path;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> cells(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, ',');) out.push_back(c);
    return out;
}

// Column `name` of data row `row` in a CSV document.
std::string column(const std::string& csv, std::size_t row, const std::string& name) {
    const auto ls = lines(csv);
    const auto head = cells(ls.at(0));
    const auto it = std::find(head.begin(), head.end(), name);
    REQUIRE(it != head.end());
    return cells(ls.at(row + 1)).at(static_cast<std::size_t>(it - head.begin()));
}

}  // namespace

TEST_CASE("input errors exit with code 2") {
    TempDir dir("errors");
    CHECK(run({"train", "--config", dir.file("missing.json")}) == kExitInput);
    CHECK(run({"frobnicate"}) == kExitInput);
    CHECK(run({}) == kExitInput);

    json bad = blobs_config(1);
    bad["train"]["lr"] = -1.0;
    CHECK(run({"train", "--config", write_config(dir, bad), "--out", dir.file("o")}) == kExitInput);

    const std::string good = write_config(dir, blobs_config(0));
    CHECK(run({"analyze", "--config", good, "--out", dir.file("o")}) == kExitInput);
    CHECK(run({"analyze", "--config", good, "--checkpoint", good, "--out", dir.file("o")}) == kExitInput);
    CHECK(run({"robustness", "--config", good, "--noise", "pink", "--out", dir.file("o")}) == kExitInput);
}

TEST_CASE("numeric failures exit with code 3") {
    TempDir dir("numeric");
    json j = blobs_config(20);
    j["train"]["lr"] = 1e6;
    const std::string cfg = write_config(dir, j);
    CHECK(run({"train", "--config", cfg, "--out", dir.file("t")}) == kExitNumeric);
    CHECK(run({"sweep", "--config", cfg, "--out", dir.file("s")}) == kExitNumeric);
    // The sweep still reports the failed row.
    const std::string csv = read_file_bytes(dir.file("s/sweep.csv"));
    CHECK(column(csv, 0, "ok") == "0");
}

TEST_CASE("train with zero epochs writes the initial model and a header-only log") {
    TempDir dir("zero");
    const std::string cfg = write_config(dir, blobs_config(0));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    const auto log = lines(read_file_bytes(dir.file("o/train_log.csv")));
    CHECK(log.size() == 1);
    CHECK(log[0].rfind("schema_version,", 0) == 0);
    const Checkpoint c = load_checkpoint(dir.file("o/checkpoint.json"));
    const Network init = build_network(Architecture{ArchType::resnet, 2, {8}, 5, 2}, 1);
    CHECK(model_checksum(c.model) == model_checksum(init));
}

TEST_CASE("reruns are byte-identical and inputs are untouched") {
    TempDir dir("rerun");
    const std::string cfg = write_config(dir, blobs_config(3));
    const std::string before = read_file_bytes(cfg);
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("a")}) == kExitOk);
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("b")}) == kExitOk);
    CHECK(read_file_bytes(dir.file("a/checkpoint.json")) == read_file_bytes(dir.file("b/checkpoint.json")));
    CHECK(read_file_bytes(dir.file("a/train_log.csv")) == read_file_bytes(dir.file("b/train_log.csv")));
    // Overwriting in place gives the same bytes too.
    const std::string first = read_file_bytes(dir.file("a/checkpoint.json"));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("a")}) == kExitOk);
    CHECK(read_file_bytes(dir.file("a/checkpoint.json")) == first);
    CHECK(read_file_bytes(cfg) == before);

    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("c"), "--seed", "2"}) == kExitOk);
    CHECK(read_file_bytes(dir.file("c/checkpoint.json")) != first);
}

TEST_CASE("blobs config fits its training set in 50 epochs") {
    TempDir dir("fit");
    const std::string cfg = write_config(dir, blobs_config(50));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    const std::string log = read_file_bytes(dir.file("o/train_log.csv"));
    CHECK(column(log, 49, "train_acc") == "1");
}

TEST_CASE("analyze on a zero-residue model") {
    TempDir dir("analyze");
    const std::string cfg = write_config(dir, blobs_config(0));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    Checkpoint c = load_checkpoint(dir.file("o/checkpoint.json"));
    for (auto& block : std::get<ResNet>(c.model.stages[0]).blocks) {
        block.w1 = Matrix(8, 8);
        block.w2 = Matrix(8, 8);
    }
    save_checkpoint(dir.file("zero.json"), c);
    REQUIRE(run({"analyze", "--config", cfg, "--checkpoint", dir.file("zero.json"), "--out", dir.file("z"),
                 "--ots", "--w2"}) == kExitOk);
    const std::string csv = read_file_bytes(dir.file("z/metrics.csv"));
    CHECK(lines(csv)[0] == "schema_version,stage,samples,ots,w2");
    CHECK(column(csv, 0, "ots") == "1");
    CHECK(column(csv, 0, "w2") == "0");
    CHECK(fs::exists(dir.file("z/metrics.json")));
}

TEST_CASE("analyze reports what the library computes") {
    TempDir dir("nodrift");
    const std::string cfg = write_config(dir, blobs_config(10));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    REQUIRE(run({"analyze", "--config", cfg, "--checkpoint", dir.file("o/checkpoint.json"), "--out",
                 dir.file("a")}) == kExitOk);
    const std::string csv = read_file_bytes(dir.file("a/metrics.csv"));

    const RunConfig rc = load_run_config(cfg);
    const Dataset data = make_dataset(rc.dataset);
    const Checkpoint c = load_checkpoint(dir.file("o/checkpoint.json"));
    const auto clouds = stage_clouds(c.model, data.train, 64);
    CHECK(column(csv, 0, "ots") == format_double(ots(clouds[0].inputs, clouds[0].outputs)));
    CHECK(column(csv, 0, "w2") == format_double(wasserstein2(clouds[0].inputs, clouds[0].outputs)));
    const double frac = std::stod(column(csv, 0, "theorem1_fraction"));
    CHECK(frac >= 0.0);
    CHECK(frac <= 1.0);
    CHECK(std::stod(column(csv, 0, "lss")) >= 1.0);
}

TEST_CASE("sweep writes one row per gamma and architecture") {
    TempDir dir("sweep");
    json j = blobs_config(2);
    j["sweep"] = {{"gammas", {0.0}}};
    REQUIRE(run({"sweep", "--config", write_config(dir, j), "--out", dir.file("one")}) == kExitOk);
    CHECK(lines(read_file_bytes(dir.file("one/sweep.csv"))).size() == 2);

    j["sweep"] = {{"gammas", {0.0, 0.01}}, {"architectures", {"resnet", "plain"}}};
    REQUIRE(run({"sweep", "--config", write_config(dir, j), "--out", dir.file("two")}) == kExitOk);
    const std::string csv = read_file_bytes(dir.file("two/sweep.csv"));
    REQUIRE(lines(csv).size() == 5);
    CHECK(column(csv, 0, "arch") == "resnet");
    CHECK(column(csv, 2, "arch") == "plain");
    CHECK(column(csv, 1, "gamma") == "0.01");
    CHECK(fs::exists(dir.file("two/checkpoints/plain_gamma_0p01.json")));
    CHECK(fs::exists(dir.file("two/plots/resnet_lss_stage0.dat")));
    const json sj = json::parse(read_file_bytes(dir.file("two/sweep.json")));
    CHECK(sj.at("rows").size() == 4);
}

TEST_CASE("robustness at level zero matches clean accuracy") {
    TempDir dir("robust");
    const std::string cfg = write_config(dir, blobs_config(5));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    const std::string ckpt = dir.file("o/checkpoint.json");
    for (const char* noise : {"gaussian", "fgsm"}) {
        REQUIRE(run({"robustness", "--config", cfg, "--checkpoint", ckpt, "--noise", noise, "--levels", "0,0.1",
                     "--out", dir.file("r")}) == kExitOk);
        const std::string csv = read_file_bytes(dir.file(std::string("r/robustness_") + noise + ".csv"));
        const RunConfig rc = load_run_config(cfg);
        const Dataset data = make_dataset(rc.dataset);
        CHECK(column(csv, 0, "accuracy") == format_double(accuracy(load_checkpoint(ckpt).model, data.test)));
        CHECK(column(csv, 0, "vr_layer0") == "0");
        CHECK(column(csv, 0, "noise") == noise);
    }
}

TEST_CASE("ablate-units and tracks export") {
    TempDir dir("units");
    const std::string cfg = write_config(dir, blobs_config(5));
    REQUIRE(run({"train", "--config", cfg, "--out", dir.file("o")}) == kExitOk);
    const std::string ckpt = dir.file("o/checkpoint.json");

    REQUIRE(run({"ablate-units", "--config", cfg, "--checkpoint", ckpt, "--k", "0,2", "--out", dir.file("a")}) ==
            kExitOk);
    const auto rows = lines(read_file_bytes(dir.file("a/ablation.csv")));
    CHECK(rows.size() == 3);
    CHECK(run({"ablate-units", "--config", cfg, "--checkpoint", ckpt, "--k", "9", "--out", dir.file("a")}) ==
          kExitInput);

    REQUIRE(run({"tracks", "export", "--config", cfg, "--checkpoint", ckpt, "--count", "10", "--out",
                 dir.file("t")}) == kExitOk);
    const TrackFile f = load_tracks(dir.file("t/tracks_stage0.gtltrk"));
    CHECK(f.tracks.size() == 10);
    CHECK(f.tracks[0].segments() == 5);
    CHECK(f.model_checksum == model_checksum(load_checkpoint(ckpt).model));
    CHECK(run({"tracks", "export", "--config", cfg, "--checkpoint", ckpt, "--stage", "3", "--out",
               dir.file("t")}) == kExitInput);
}

TEST_CASE("the installed binary reports exit codes") {
    TempDir dir("binary");
    const std::string bin = GTL_BINARY;
    const std::string quiet = " > /dev/null 2>&1";
    const int missing = std::system((bin + " train --config " + dir.file("nope.json") + quiet).c_str());
    CHECK(WEXITSTATUS(missing) == kExitInput);
    const std::string cfg = write_config(dir, blobs_config(0));
    const int ok = std::system((bin + " train --config " + cfg + " --out " + dir.file("o") + quiet).c_str());
    CHECK(WEXITSTATUS(ok) == kExitOk);
    CHECK(WEXITSTATUS(std::system((bin + " --help" + quiet).c_str())) == kExitOk);
}
