#include "gtl/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gtl/io.hpp"

namespace gtl {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string checkpoint;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> ot_subsample;
    bool lss = false, ots = false, w2 = false, theorem1 = false;
    std::string noise = "gaussian";
    std::vector<double> levels;
    std::optional<std::size_t> layer;
    std::vector<std::size_t> ks;
    std::uint32_t stage = 0;
    std::optional<std::size_t> count;
};

struct Context {
    RunConfig cfg;
    Dataset data;
    fs::path out;
};

Context load_context(const Options& o) {
    Context ctx;
    ctx.cfg = load_run_config(o.config);
    if (o.seed) ctx.cfg.train.seed = *o.seed;
    if (o.ot_subsample) {
        if (*o.ot_subsample == 0) throw ConfigError("--ot-subsample", "must be >= 1");
        ctx.cfg.train.ot_subsample = *o.ot_subsample;
    }
    ctx.out = o.out.empty() ? fs::path(ctx.cfg.output.dir) : fs::path(o.out);
    ctx.data = make_dataset(ctx.cfg.dataset);
    ctx.cfg.arch.input_dim = ctx.data.dim();
    ctx.cfg.arch.output_dim = ctx.data.n_classes;
    return ctx;
}

Checkpoint load_matching_checkpoint(const Options& o, const Context& ctx) {
    if (o.checkpoint.empty()) throw ConfigError("--checkpoint", "required for this command");
    Checkpoint ckpt = load_checkpoint(o.checkpoint);
    if (ckpt.arch.input_dim != ctx.data.dim() || ckpt.arch.output_dim != ctx.data.n_classes)
        throw DimensionError("checkpoint expects input dim " + std::to_string(ckpt.arch.input_dim) + " and " +
                             std::to_string(ckpt.arch.output_dim) + " classes; dataset has dim " +
                             std::to_string(ctx.data.dim()) + " and " + std::to_string(ctx.data.n_classes) + " classes");
    return ckpt;
}

void emit(const fs::path& path, const std::string& contents) {
    write_file_atomic(path.string(), contents);
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_train(const Options& o) {
    const Context ctx = load_context(o);
    const Network init = build_network(ctx.cfg.arch, ctx.cfg.train.seed);
    const TrainResult r = train(init, ctx.data, ctx.cfg.train);
    emit(ctx.out / "checkpoint.json", dump_json(checkpoint_to_json({ctx.cfg.arch, ctx.cfg.train.seed, r.model})));
    emit(ctx.out / "train_log.csv", train_log_csv(r.log, ctx.cfg.arch.stage_widths.size()));
    if (!r.log.epochs.empty()) {
        const EpochRecord& last = r.log.epochs.back();
        char line[160];
        std::snprintf(line, sizeof line, "epoch %zu  loss %.6g  train_acc %.4f  test_acc %.4f\n", last.epoch, last.loss,
                      last.train_acc, last.test_acc);
        std::cout << line;
    }
    return kExitOk;
}

int cmd_analyze(const Options& o) {
    Context ctx = load_context(o);
    const Checkpoint ckpt = load_matching_checkpoint(o, ctx);
    MetricsReport report;
    if (o.lss || o.ots || o.w2 || o.theorem1) {
        report.lss = o.lss;
        report.ots = o.ots;
        report.w2 = o.w2;
        report.theorem1 = o.theorem1;
    }
    const auto metrics = evaluate_stages(ckpt.model, ctx.data.train, ctx.cfg.train);
    std::vector<std::vector<Track>> tracks;
    if (report.theorem1) {
        const std::size_t n = std::min(ctx.cfg.train.ot_subsample, ctx.data.train.size());
        tracks = stage_tracks(ckpt.model, batch_inputs(ctx.data.train, 0, n));
    }
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        StageReport s{metrics[k], 0.0};
        if (report.theorem1) s.theorem1_fraction = track_separation_fraction(tracks[k]);
        report.stages.push_back(s);
    }
    if (ctx.cfg.output.csv) emit(ctx.out / "metrics.csv", metrics_csv(report));
    if (ctx.cfg.output.json) emit(ctx.out / "metrics.json", dump_json(metrics_json(report)));
    return kExitOk;
}

std::string gamma_tag(double g) {
    std::string s = format_double(g);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

int cmd_sweep(const Options& o) {
    const Context ctx = load_context(o);
    SweepReport all;
    const std::size_t threads = thread_budget();
    for (ArchType type : ctx.cfg.sweep_archs) {
        Architecture arch = ctx.cfg.arch;
        arch.type = type;
        const auto runs = gamma_sweep(arch, ctx.data, ctx.cfg.gammas, ctx.cfg.train, threads);
        for (const SweepRun& run : runs) {
            all.rows.push_back(run.row);
            if (run.result) {
                const fs::path p = ctx.out / "checkpoints" / (std::string(to_string(type)) + "_gamma_" + gamma_tag(run.row.gamma) + ".json");
                emit(p, dump_json(checkpoint_to_json({arch, ctx.cfg.train.seed, run.result->model})));
            } else {
                std::fprintf(stderr, "%s gamma %s failed: %s\n", to_string(type), format_double(run.row.gamma).c_str(),
                             run.row.message.c_str());
            }
        }
    }
    if (ctx.cfg.output.csv) emit(ctx.out / "sweep.csv", sweep_csv(all));
    if (ctx.cfg.output.json) {
        nlohmann::json rows = nlohmann::json::array();
        for (const SweepRow& r : all.rows)
            rows.push_back({{"arch", r.arch}, {"gamma", r.gamma}, {"ok", r.ok}, {"message", r.message},
                            {"train_acc", r.train_acc}, {"test_acc", r.test_acc}, {"lss", r.lss}, {"ots", r.ots},
                            {"w2", r.w2}, {"weight_energy", r.weight_energy}});
        emit(ctx.out / "sweep.json", dump_json({{"schema_version", kSchemaVersion}, {"kind", "gtl-sweep"}, {"rows", rows}}));
    }
    // Two-column (gamma, value) series, one file per architecture and metric.
    for (ArchType type : ctx.cfg.sweep_archs) {
        const std::string arch = to_string(type);
        const auto write_series = [&](const std::string& name, auto value_of) {
            std::string text = "# schema_version " + std::to_string(kSchemaVersion) + "\n# gamma " + name + "\n";
            for (const SweepRow& r : all.rows)
                if (r.arch == arch && r.ok) text += format_double(r.gamma) + " " + format_double(value_of(r)) + "\n";
            emit(ctx.out / "plots" / (arch + "_" + name + ".dat"), text);
        };
        write_series("test_acc", [](const SweepRow& r) { return r.test_acc; });
        write_series("weight_energy", [](const SweepRow& r) { return r.weight_energy; });
        for (std::size_t k = 0; k < ctx.cfg.arch.stage_widths.size(); ++k) {
            const std::string sfx = "_stage" + std::to_string(k);
            write_series("lss" + sfx, [k](const SweepRow& r) { return r.lss[k]; });
            write_series("ots" + sfx, [k](const SweepRow& r) { return r.ots[k]; });
            write_series("w2" + sfx, [k](const SweepRow& r) { return r.w2[k]; });
        }
    }
    const bool any_ok = std::any_of(all.rows.begin(), all.rows.end(), [](const SweepRow& r) { return r.ok; });
    return any_ok ? kExitOk : kExitNumeric;
}

int cmd_robustness(const Options& o) {
    const Context ctx = load_context(o);
    const Checkpoint ckpt = load_matching_checkpoint(o, ctx);
    NoiseKind kind;
    try {
        kind = noise_kind_from_string(o.noise);
    } catch (const RangeError&) {
        throw ConfigError("--noise", "must be gaussian or fgsm");
    }
    std::vector<double> levels = o.levels;
    if (levels.empty()) {
        const double step = kind == NoiseKind::gaussian ? 0.1 : 0.02;
        for (int i = 0; i <= 10; ++i) levels.push_back(step * i);
    }
    for (double l : levels)
        if (!(l >= 0.0)) throw ConfigError("--levels", "noise levels must be nonnegative");
    const RobustnessReport r =
        robustness_curve(ckpt.model, ctx.data.test, ctx.data.n_classes, kind, levels, ctx.cfg.train.seed, ctx.cfg.train.loss);
    emit(ctx.out / ("robustness_" + o.noise + ".csv"), robustness_csv(r));
    return kExitOk;
}

int cmd_ablate(const Options& o) {
    const Context ctx = load_context(o);
    const Checkpoint ckpt = load_matching_checkpoint(o, ctx);
    const auto spans = stage_spans(ckpt.model);
    const std::size_t layer = o.layer.value_or(spans.front().first + spans.front().segments);
    std::size_t width = 0;
    for (std::size_t k = 0; k < spans.size(); ++k)
        if (layer > spans[k].first && layer <= spans[k].first + spans[k].segments) width = ckpt.arch.stage_widths[k];
    if (width == 0) throw ConfigError("--layer", "representation " + std::to_string(layer) + " is not inside a stage");
    std::vector<std::size_t> ks = o.ks;
    if (ks.empty()) ks = {0, width / 4, width / 2};
    std::string csv = "schema_version,layer,k,accuracy\n";
    for (std::size_t k : ks) {
        if (k > width) throw ConfigError("--k", "k = " + std::to_string(k) + " exceeds width " + std::to_string(width));
        const double acc = unit_elimination_eval(ckpt.model, ctx.data, layer, k);
        csv += std::to_string(kSchemaVersion) + "," + std::to_string(layer) + "," + std::to_string(k) + "," +
               format_double(acc) + "\n";
    }
    emit(ctx.out / "ablation.csv", csv);
    return kExitOk;
}

int cmd_tracks_export(const Options& o) {
    const Context ctx = load_context(o);
    const Checkpoint ckpt = load_matching_checkpoint(o, ctx);
    const auto spans = stage_spans(ckpt.model);
    if (o.stage >= spans.size()) throw ConfigError("--stage", "the model has " + std::to_string(spans.size()) + " stages");
    const std::size_t n = std::min(o.count.value_or(ctx.cfg.train.ot_subsample), ctx.data.train.size());
    TrackFile file;
    file.stage_id = o.stage;
    file.model_checksum = model_checksum(ckpt.model);
    if (n > 0) file.tracks = stage_tracks(ckpt.model, batch_inputs(ctx.data.train, 0, n))[o.stage];
    emit(ctx.out / ("tracks_stage" + std::to_string(o.stage) + ".gtltrk"), encode_tracks(file));
    return kExitOk;
}

int report(const char* kind, const std::exception& e, int code) {
    std::fprintf(stderr, "gtl: %s: %s\n", kind, e.what());
    return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Geodesic-track laboratory: train, sweep and analyze bias-free ReLU networks"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the training seed");
        sub->add_option("--out", o.out, "Output directory (overrides output.dir)");
        sub->add_option("--ot-subsample", o.ot_subsample, "Samples used for OTS / W2");
    };
    const auto add_checkpoint = [&](CLI::App* sub) {
        sub->add_option("--checkpoint", o.checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
    };

    CLI::App* train_cmd = app.add_subcommand("train", "Train one model; writes checkpoint.json and train_log.csv");
    add_common(train_cmd);

    CLI::App* analyze = app.add_subcommand("analyze", "Per-stage LSS / OTS / W2 / separation-bound report");
    add_common(analyze);
    add_checkpoint(analyze);
    analyze->add_flag("--lss", o.lss, "Line-shape score");
    analyze->add_flag("--ots", o.ots, "Optimal transport score");
    analyze->add_flag("--w2", o.w2, "Wasserstein-2 between stage input and output");
    analyze->add_flag("--theorem1", o.theorem1, "Fraction of track pairs meeting the separation bound");

    CLI::App* sweep = app.add_subcommand("sweep", "Gamma sweep over the configured architectures");
    add_common(sweep);

    CLI::App* robust = app.add_subcommand("robustness", "Accuracy and variation rate under input noise");
    add_common(robust);
    add_checkpoint(robust);
    robust->add_option("--noise", o.noise, "gaussian or fgsm");
    robust->add_option("--levels", o.levels, "Noise levels (sigma or epsilon)")->delimiter(',');

    CLI::App* ablate = app.add_subcommand("ablate-units", "Unit-elimination accuracy");
    add_common(ablate);
    add_checkpoint(ablate);
    ablate->add_option("--layer", o.layer, "Representation index (default: end of stage 0)");
    ablate->add_option("--k", o.ks, "Units eliminated per class")->delimiter(',');

    CLI::App* tracks = app.add_subcommand("tracks", "Track files");
    tracks->require_subcommand(1);
    CLI::App* tracks_export = tracks->add_subcommand("export", "Write one stage's tracks as a binary track file");
    add_common(tracks_export);
    add_checkpoint(tracks_export);
    tracks_export->add_option("--stage", o.stage, "Stage index");
    tracks_export->add_option("--count", o.count, "Number of training samples (default: ot_subsample)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(o);
        if (analyze->parsed()) return cmd_analyze(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (robust->parsed()) return cmd_robustness(o);
        if (ablate->parsed()) return cmd_ablate(o);
        if (tracks_export->parsed()) return cmd_tracks_export(o);
    } catch (const ConfigError& e) {
        return report("config error", e, kExitInput);
    } catch (const FormatError& e) {
        return report("format error", e, kExitInput);
    } catch (const DimensionError& e) {
        return report("dimension error", e, kExitInput);
    } catch (const SizeError& e) {
        return report("size error", e, kExitInput);
    } catch (const RangeError& e) {
        return report("range error", e, kExitInput);
    } catch (const Error& e) {
        return report("numeric failure", e, kExitNumeric);
    } catch (const std::filesystem::filesystem_error& e) {
        return report("io error", e, kExitInput);
    }
    return kExitInput;
}

}  // namespace gtl
