#include "gtl/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

namespace gtl {

using nlohmann::json;

// ---------------------------------------------------------------- plumbing

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_into(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(it.key()).dump() + ": ";
                dump_into(it.value(), out, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case json::value_t::array: {
            // Arrays of scalars stay on one line.
            const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
            if (j.empty()) {
                out += "[]";
            } else if (flat) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ", ";
                    dump_into(j[i], out, depth + 1);
                }
                out += "]";
            } else {
                out += "[\n";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) out += ",\n";
                    out += pad;
                    dump_into(j[i], out, depth + 1);
                }
                out += "\n" + close_pad + "]";
            }
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const json& j) {
    std::string out;
    dump_into(j, out, 0);
    out += "\n";
    return out;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError(tmp + ": cannot open for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw FormatError(tmp + ": write failed");
    }
    std::filesystem::rename(tmp, target);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state) {
    for (std::uint8_t b : bytes) {
        state ^= b;
        state *= 0x100000001b3ULL;
    }
    return state;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_le(const std::string& in, std::size_t offset, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[offset + i])} << (8 * i);
    return v;
}

std::uint64_t checksum_of(const std::string& bytes, std::size_t offset = 0) {
    return fnv1a64({reinterpret_cast<const std::uint8_t*>(bytes.data()) + offset, bytes.size() - offset});
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::uint64_t model_checksum(const Network& net) {
    std::string bytes;
    for (const Matrix* w : weights(net)) {
        put_u64(bytes, w->rows());
        put_u64(bytes, w->cols());
        for (double v : w->values()) put_f64(bytes, v);
    }
    return checksum_of(bytes);
}

// ---------------------------------------------------------------- checkpoints

json architecture_to_json(const Architecture& arch) {
    return {{"type", to_string(arch.type)},
            {"input_dim", arch.input_dim},
            {"stage_widths", arch.stage_widths},
            {"blocks_per_stage", arch.blocks_per_stage},
            {"output_dim", arch.output_dim}};
}

Architecture architecture_from_json(const json& j) {
    try {
        Architecture a;
        a.type = arch_type_from_string(j.at("type").get<std::string>());
        a.input_dim = j.at("input_dim").get<std::size_t>();
        a.stage_widths = j.at("stage_widths").get<std::vector<std::size_t>>();
        a.blocks_per_stage = j.at("blocks_per_stage").get<std::size_t>();
        a.output_dim = j.at("output_dim").get<std::size_t>();
        return a;
    } catch (const json::exception& e) {
        throw FormatError(std::string("architecture: ") + e.what());
    } catch (const RangeError& e) {
        throw FormatError(std::string("architecture: ") + e.what());
    }
}

json checkpoint_to_json(const Checkpoint& ckpt) {
    json ws = json::array();
    for (const Matrix* w : weights(ckpt.model)) {
        json rows = json::array();
        for (std::size_t r = 0; r < w->rows(); ++r) {
            const auto row = w->row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        ws.push_back(std::move(rows));
    }
    return {{"schema_version", kSchemaVersion},
            {"kind", "gtl-checkpoint"},
            {"architecture", architecture_to_json(ckpt.arch)},
            {"seed", ckpt.seed},
            {"checksum", hex64(model_checksum(ckpt.model))},
            {"weights", std::move(ws)}};
}

Checkpoint checkpoint_from_json(const json& j) {
    Checkpoint ckpt;
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw FormatError("checkpoint: unsupported schema_version " + j.at("schema_version").dump());
        if (j.at("kind") != "gtl-checkpoint") throw FormatError("checkpoint: not a checkpoint document");
        ckpt.arch = architecture_from_json(j.at("architecture"));
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.model = build_network(ckpt.arch, ckpt.seed);
        const json& ws = j.at("weights");
        auto slots = weights(ckpt.model);
        if (!ws.is_array() || ws.size() != slots.size())
            throw FormatError("checkpoint: expected " + std::to_string(slots.size()) + " weight matrices");
        for (std::size_t k = 0; k < slots.size(); ++k) {
            Matrix& m = *slots[k];
            const json& rows = ws[k];
            if (!rows.is_array() || rows.size() != m.rows())
                throw FormatError("checkpoint: weights[" + std::to_string(k) + "] has the wrong row count");
            for (std::size_t r = 0; r < m.rows(); ++r) {
                const json& row = rows[r];
                if (!row.is_array() || row.size() != m.cols())
                    throw FormatError("checkpoint: weights[" + std::to_string(k) + "][" + std::to_string(r) +
                                      "] has the wrong column count");
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    if (!row[c].is_number())
                        throw FormatError("checkpoint: weights[" + std::to_string(k) + "] holds a non-number");
                    m(r, c) = row[c].get<double>();
                }
            }
        }
        const std::string expected = j.at("checksum").get<std::string>();
        const std::string actual = hex64(model_checksum(ckpt.model));
        if (expected != actual) throw FormatError("checkpoint: checksum " + actual + " does not match recorded " + expected);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    } catch (const SizeError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    } catch (const DimensionError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    write_file_atomic(path, dump_json(checkpoint_to_json(ckpt)));
}

Checkpoint load_checkpoint(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file_bytes(path));
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

// ---------------------------------------------------------------- tracks

namespace {

constexpr char kTrackMagic[9] = "GTLTRK01";
constexpr std::uint32_t kTrackVersion = 1;

}  // namespace

std::string encode_tracks(const TrackFile& file) {
    const std::size_t n_states = file.tracks.empty() ? 0 : file.tracks.front().segments() + 1;
    const std::size_t dim = file.tracks.empty() ? 0 : file.tracks.front().dim();
    std::string body;
    body.reserve(file.tracks.size() * n_states * dim * 8);
    for (const Track& t : file.tracks) {
        if (t.segments() + 1 != n_states || t.dim() != dim)
            throw DimensionError("save_tracks: every track needs the same state count and dimension");
        for (const Vector& s : t.states())
            for (double v : s) put_f64(body, v);
    }
    std::string out(kTrackMagic, 8);
    put_u32(out, kTrackVersion);
    put_u32(out, file.stage_id);
    put_u64(out, file.tracks.size());
    put_u64(out, n_states);
    put_u64(out, dim);
    put_u64(out, file.model_checksum);
    put_u64(out, checksum_of(body));
    return out + body;
}

TrackFile decode_tracks(const std::string& bytes) {
    if (bytes.size() < kTrackHeaderBytes)
        throw FormatError("track file truncated: expected at least " + std::to_string(kTrackHeaderBytes) +
                          " header bytes, found " + std::to_string(bytes.size()));
    if (bytes.compare(0, 8, kTrackMagic) != 0) throw FormatError("track file: bad magic at offset 0");
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
    if (version != kTrackVersion) throw FormatError("track file: unsupported version " + std::to_string(version) + " at offset 8");
    TrackFile file;
    file.stage_id = static_cast<std::uint32_t>(get_le(bytes, 12, 4));
    const std::uint64_t n_tracks = get_le(bytes, 16, 8);
    const std::uint64_t n_states = get_le(bytes, 24, 8);
    const std::uint64_t dim = get_le(bytes, 32, 8);
    file.model_checksum = get_le(bytes, 40, 8);
    const std::uint64_t body_checksum = get_le(bytes, 48, 8);
    if (n_tracks > 0 && (n_states < 2 || dim == 0))
        throw FormatError("track file: header at offset 24 declares " + std::to_string(n_states) + " states of dim " +
                          std::to_string(dim));
    const long double want = static_cast<long double>(n_tracks) * n_states * dim * 8 + kTrackHeaderBytes;
    if (want > static_cast<long double>(bytes.size()) || want < static_cast<long double>(bytes.size()))
        throw FormatError("track file size mismatch: expected " + std::to_string(static_cast<unsigned long long>(want)) +
                          " bytes, found " + std::to_string(bytes.size()));
    if (checksum_of(bytes, kTrackHeaderBytes) != body_checksum)
        throw FormatError("track file: body checksum mismatch (header offset 48)");
    std::size_t offset = kTrackHeaderBytes;
    for (std::uint64_t t = 0; t < n_tracks; ++t) {
        std::vector<Vector> states;
        for (std::uint64_t s = 0; s < n_states; ++s) {
            Vector v(dim);
            for (std::uint64_t i = 0; i < dim; ++i, offset += 8) v[i] = std::bit_cast<double>(get_le(bytes, offset, 8));
            states.push_back(std::move(v));
        }
        try {
            file.tracks.emplace_back(std::move(states));
        } catch (const Error& e) {
            throw FormatError("track file: track " + std::to_string(t) + ": " + e.what());
        }
    }
    return file;
}

void save_tracks(const std::string& path, const TrackFile& file) { write_file_atomic(path, encode_tracks(file)); }

TrackFile load_tracks(const std::string& path) {
    try {
        return decode_tracks(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------- config

namespace {

struct Field {
    const json& j;
    std::string path;

    void require_object() const {
        if (!j.is_object()) throw ConfigError(path, "expected an object");
    }
    void only(std::initializer_list<const char*> allowed) const {
        require_object();
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!keys.count(it.key())) throw ConfigError(path + "." + it.key(), "unknown field");
    }
    bool has(const char* key) const { return j.contains(key); }
    Field at(const char* key) const {
        if (!j.contains(key)) throw ConfigError(path + "." + key, "required field is missing");
        return {j.at(key), path + "." + key};
    }
    Field at(std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]"}; }

    double number(double lo = -HUGE_VAL, bool lo_exclusive = false) const {
        if (!j.is_number()) throw ConfigError(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
        if (lo_exclusive ? !(v > lo) : !(v >= lo))
            throw ConfigError(path, "must be " + std::string(lo_exclusive ? "> " : ">= ") + format_double(lo));
        return v;
    }
    std::uint64_t integer(std::uint64_t lo = 0) const {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
            throw ConfigError(path, "expected a nonnegative integer");
        const auto v = j.get<std::uint64_t>();
        if (v < lo) throw ConfigError(path, "must be >= " + std::to_string(lo));
        return v;
    }
    std::string string() const {
        if (!j.is_string()) throw ConfigError(path, "expected a string");
        return j.get<std::string>();
    }
    std::size_t size() const {
        if (!j.is_array()) throw ConfigError(path, "expected an array");
        return j.size();
    }
};

std::string resolve(const std::string& base, const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? p : (std::filesystem::path(base) / fp).lexically_normal().string();
}

DatasetSpec parse_dataset(const Field& f, const std::string& base_dir) {
    f.require_object();
    DatasetSpec d;
    const std::string kind = f.at("kind").string();
    try {
        d.kind = dataset_kind_from_string(kind);
    } catch (const RangeError&) {
        throw ConfigError(f.path + ".kind", "must be one of blobs, spirals, mnist-subset");
    }
    if (d.kind == DatasetKind::mnist_subset) {
        f.only({"kind", "seed", "train_images", "train_labels", "test_images", "test_labels", "classes",
                "cap_per_class", "test_cap_per_class"});
        d.train_images = resolve(base_dir, f.at("train_images").string());
        d.train_labels = resolve(base_dir, f.at("train_labels").string());
        d.test_images = resolve(base_dir, f.at("test_images").string());
        d.test_labels = resolve(base_dir, f.at("test_labels").string());
        if (f.has("classes")) {
            const Field c = f.at("classes");
            if (c.size() < 2) throw ConfigError(c.path, "needs at least two classes");
            std::set<std::size_t> seen;
            for (std::size_t i = 0; i < c.size(); ++i) {
                const auto v = c.at(i).integer();
                if (v > 9) throw ConfigError(c.at(i).path, "must be a digit 0..9");
                if (!seen.insert(v).second) throw ConfigError(c.at(i).path, "duplicate class");
                d.classes.push_back(v);
            }
        }
        if (f.has("cap_per_class")) d.cap_per_class = f.at("cap_per_class").integer();
        if (f.has("test_cap_per_class")) d.test_cap_per_class = f.at("test_cap_per_class").integer();
    } else {
        f.only({"kind", "seed", "n_classes", "per_class", "dim", "noise", "separation"});
        if (f.has("n_classes")) d.n_classes = f.at("n_classes").integer(2);
        if (f.has("per_class")) d.per_class = f.at("per_class").integer(2);
        if (f.has("dim")) {
            d.dim = f.at("dim").integer(1);
            if (d.kind == DatasetKind::spirals && d.dim != 2) throw ConfigError(f.path + ".dim", "spirals are planar (dim 2)");
        }
        if (d.kind == DatasetKind::spirals) d.dim = 2;
        if (f.has("noise")) d.noise = f.at("noise").number(0.0);
        if (f.has("separation")) d.separation = f.at("separation").number(0.0);
    }
    if (f.has("seed")) d.seed = f.at("seed").integer();
    return d;
}

ArchType parse_arch_type(const Field& f) {
    const std::string s = f.string();
    if (s == "plain") return ArchType::plain;
    if (s == "resnet") return ArchType::resnet;
    throw ConfigError(f.path, "must be plain or resnet");
}

}  // namespace

RunConfig parse_run_config(const json& j, const std::string& base_dir) {
    const Field root{j, "$"};
    root.only({"schema_version", "dataset", "architecture", "train", "sweep", "output"});
    if (root.at("schema_version").integer() != static_cast<std::uint64_t>(kSchemaVersion))
        throw ConfigError("$.schema_version", "must be " + std::to_string(kSchemaVersion));
    RunConfig cfg;
    cfg.dataset = parse_dataset(root.at("dataset"), base_dir);

    const Field a = root.at("architecture");
    a.only({"type", "stage_widths", "blocks_per_stage"});
    cfg.arch.type = parse_arch_type(a.at("type"));
    const Field widths = a.at("stage_widths");
    if (widths.size() == 0) throw ConfigError(widths.path, "needs at least one stage");
    for (std::size_t i = 0; i < widths.size(); ++i) cfg.arch.stage_widths.push_back(widths.at(i).integer(1));
    cfg.arch.blocks_per_stage = a.at("blocks_per_stage").integer(1);

    if (root.has("train")) {
        const Field t = root.at("train");
        t.only({"gamma", "lr", "epochs", "batch_size", "loss", "seed", "ot_subsample", "eval_subset"});
        TrainConfig& tc = cfg.train;
        if (t.has("gamma")) tc.gamma = t.at("gamma").number(0.0);
        if (t.has("lr")) tc.lr = t.at("lr").number(0.0, true);
        if (t.has("epochs")) tc.epochs = t.at("epochs").integer();
        if (t.has("batch_size")) tc.batch_size = t.at("batch_size").integer(1);
        if (t.has("loss")) {
            const Field l = t.at("loss");
            const std::string s = l.string();
            if (s != "cross-entropy" && s != "mse") throw ConfigError(l.path, "must be cross-entropy or mse");
            tc.loss = loss_from_string(s);
        }
        if (t.has("seed")) tc.seed = t.at("seed").integer();
        if (t.has("ot_subsample")) tc.ot_subsample = t.at("ot_subsample").integer(1);
        if (t.has("eval_subset")) tc.eval_subset = t.at("eval_subset").integer(1);
    }

    if (root.has("sweep")) {
        const Field s = root.at("sweep");
        s.only({"gammas", "architectures"});
        const Field g = s.at("gammas");
        if (g.size() == 0) throw ConfigError(g.path, "needs at least one gamma");
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = g.at(i).number(0.0);
            if (std::find(cfg.gammas.begin(), cfg.gammas.end(), v) != cfg.gammas.end())
                throw ConfigError(g.at(i).path, "duplicate gamma");
            cfg.gammas.push_back(v);
        }
        if (s.has("architectures")) {
            const Field as = s.at("architectures");
            if (as.size() == 0) throw ConfigError(as.path, "needs at least one architecture");
            for (std::size_t i = 0; i < as.size(); ++i) {
                const ArchType t = parse_arch_type(as.at(i));
                if (std::find(cfg.sweep_archs.begin(), cfg.sweep_archs.end(), t) != cfg.sweep_archs.end())
                    throw ConfigError(as.at(i).path, "duplicate architecture");
                cfg.sweep_archs.push_back(t);
            }
        }
    }
    if (cfg.gammas.empty()) cfg.gammas.push_back(cfg.train.gamma);
    if (cfg.sweep_archs.empty()) cfg.sweep_archs.push_back(cfg.arch.type);

    if (root.has("output")) {
        const Field o = root.at("output");
        o.only({"dir", "formats"});
        if (o.has("dir")) cfg.output.dir = o.at("dir").string();
        if (o.has("formats")) {
            const Field fm = o.at("formats");
            if (fm.size() == 0) throw ConfigError(fm.path, "needs at least one format");
            cfg.output.csv = cfg.output.json = false;
            for (std::size_t i = 0; i < fm.size(); ++i) {
                const std::string s = fm.at(i).string();
                if (s == "csv") cfg.output.csv = true;
                else if (s == "json") cfg.output.json = true;
                else throw ConfigError(fm.at(i).path, "must be csv or json");
            }
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file_bytes(path));
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("not valid JSON: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError("$", e.what());
    }
    const std::filesystem::path p(path);
    return parse_run_config(j, p.has_parent_path() ? p.parent_path().string() : ".");
}

// ---------------------------------------------------------------- reports

namespace {

std::string join_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ",";
        out += cells[i];
    }
    return out + "\n";
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

void add_stage_columns(std::vector<std::string>& header, const char* name, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) header.push_back(std::string(name) + "_stage" + std::to_string(k));
}

}  // namespace

std::string train_log_csv(const TrainLog& log, std::size_t n_stages) {
    std::vector<std::string> header{"schema_version", "epoch", "loss", "train_acc", "test_acc"};
    add_stage_columns(header, "mean_lss", n_stages);
    header.push_back("weight_energy");
    std::string out = join_row(header);
    for (const EpochRecord& e : log.epochs) {
        std::vector<std::string> row{std::to_string(kSchemaVersion), std::to_string(e.epoch), format_double(e.loss),
                                     format_double(e.train_acc), format_double(e.test_acc)};
        for (std::size_t k = 0; k < n_stages; ++k)
            row.push_back(k < e.mean_lss.size() ? format_double(e.mean_lss[k]) : "nan");
        row.push_back(format_double(e.weight_energy));
        out += join_row(row);
    }
    return out;
}

std::string sweep_csv(const SweepReport& report) {
    std::size_t n_stages = 0;
    for (const SweepRow& r : report.rows) n_stages = std::max(n_stages, r.lss.size());
    std::vector<std::string> header{"schema_version", "arch", "gamma", "ok", "train_acc", "test_acc"};
    add_stage_columns(header, "lss", n_stages);
    add_stage_columns(header, "ots", n_stages);
    add_stage_columns(header, "w2", n_stages);
    header.push_back("weight_energy");
    header.push_back("message");
    std::string out = join_row(header);
    for (const SweepRow& r : report.rows) {
        std::vector<std::string> row{std::to_string(kSchemaVersion), r.arch, format_double(r.gamma), r.ok ? "1" : "0"};
        row.push_back(r.ok ? format_double(r.train_acc) : "nan");
        row.push_back(r.ok ? format_double(r.test_acc) : "nan");
        for (const auto* series : {&r.lss, &r.ots, &r.w2})
            for (std::size_t k = 0; k < n_stages; ++k)
                row.push_back(k < series->size() ? format_double((*series)[k]) : "nan");
        row.push_back(r.ok ? format_double(r.weight_energy) : "nan");
        row.push_back(csv_quote(r.message));
        out += join_row(row);
    }
    return out;
}

std::string robustness_csv(const RobustnessReport& report) {
    const std::size_t n_layers = report.rows.empty() ? 0 : report.rows.front().rate.size();
    std::vector<std::string> header{"schema_version", "noise", "level", "accuracy"};
    for (std::size_t l = 0; l < n_layers; ++l) header.push_back("vr_layer" + std::to_string(l));
    std::string out = join_row(header);
    for (const RobustnessRow& r : report.rows) {
        std::vector<std::string> row{std::to_string(kSchemaVersion), to_string(report.kind), format_double(r.level),
                                     format_double(r.accuracy)};
        for (double v : r.rate) row.push_back(format_double(v));
        out += join_row(row);
    }
    return out;
}

std::string metrics_csv(const MetricsReport& report) {
    std::vector<std::string> header{"schema_version", "stage", "samples"};
    if (report.lss) {
        header.push_back("lss");
        header.push_back("lss_skipped");
    }
    if (report.ots) header.push_back("ots");
    if (report.w2) header.push_back("w2");
    if (report.theorem1) header.push_back("theorem1_fraction");
    std::string out = join_row(header);
    for (std::size_t k = 0; k < report.stages.size(); ++k) {
        const StageReport& s = report.stages[k];
        std::vector<std::string> row{std::to_string(kSchemaVersion), std::to_string(k),
                                     std::to_string(s.metrics.ot_samples)};
        if (report.lss) {
            row.push_back(format_double(s.metrics.lss));
            row.push_back(std::to_string(s.metrics.lss_skipped));
        }
        if (report.ots) row.push_back(format_double(s.metrics.ots));
        if (report.w2) row.push_back(format_double(s.metrics.w2));
        if (report.theorem1) row.push_back(format_double(s.theorem1_fraction));
        out += join_row(row);
    }
    return out;
}

json metrics_json(const MetricsReport& report) {
    json stages = json::array();
    for (std::size_t k = 0; k < report.stages.size(); ++k) {
        const StageReport& s = report.stages[k];
        json row{{"stage", k}, {"samples", s.metrics.ot_samples}};
        if (report.lss) {
            row["lss"] = s.metrics.lss;
            row["lss_skipped"] = s.metrics.lss_skipped;
        }
        if (report.ots) row["ots"] = s.metrics.ots;
        if (report.w2) row["w2"] = s.metrics.w2;
        if (report.theorem1) row["theorem1_fraction"] = s.theorem1_fraction;
        stages.push_back(std::move(row));
    }
    return {{"schema_version", kSchemaVersion}, {"kind", "gtl-metrics"}, {"stages", std::move(stages)}};
}

}  // namespace gtl
