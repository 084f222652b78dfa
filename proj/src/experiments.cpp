#include "gtl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>

namespace gtl {

// ---------------------------------------------------------------- IDX

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::string& path) {
    if (bytes.size() < offset + 4)
        throw FormatError(path + ": truncated header at offset " + std::to_string(offset) + " (file has " +
                          std::to_string(bytes.size()) + " bytes)");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                       static_cast<char>(v)};
    out.write(b, 4);
}

std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

}  // namespace

IdxImages read_idx_images(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_be32(bytes, 0, path);
    if (magic != kIdxImagesMagic)
        throw FormatError(path + ": bad magic " + hex32(magic) + " at offset 0, expected " + hex32(kIdxImagesMagic));
    IdxImages img;
    img.count = read_be32(bytes, 4, path);
    img.rows = read_be32(bytes, 8, path);
    img.cols = read_be32(bytes, 12, path);
    const std::size_t need = img.count * img.rows * img.cols;
    if (bytes.size() - 16 != need)
        throw FormatError(path + ": pixel data at offset 16 should hold " + std::to_string(need) + " bytes, found " +
                          std::to_string(bytes.size() - 16));
    img.pixels.assign(bytes.begin() + 16, bytes.end());
    return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
    const auto bytes = read_file(path);
    const std::uint32_t magic = read_be32(bytes, 0, path);
    if (magic != kIdxLabelsMagic)
        throw FormatError(path + ": bad magic " + hex32(magic) + " at offset 0, expected " + hex32(kIdxLabelsMagic));
    const std::size_t count = read_be32(bytes, 4, path);
    if (bytes.size() - 8 != count)
        throw FormatError(path + ": label data at offset 8 should hold " + std::to_string(count) + " bytes, found " +
                          std::to_string(bytes.size() - 8));
    return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const std::string& path, const IdxImages& images) {
    if (images.pixels.size() != images.count * images.rows * images.cols)
        throw SizeError("write_idx_images: pixel count does not match the header");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing");
    put_be32(out, kIdxImagesMagic);
    put_be32(out, static_cast<std::uint32_t>(images.count));
    put_be32(out, static_cast<std::uint32_t>(images.rows));
    put_be32(out, static_cast<std::uint32_t>(images.cols));
    out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing");
    put_be32(out, kIdxLabelsMagic);
    put_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

// ---------------------------------------------------------------- datasets

const char* to_string(DatasetKind k) {
    switch (k) {
        case DatasetKind::blobs: return "blobs";
        case DatasetKind::spirals: return "spirals";
        case DatasetKind::mnist_subset: return "mnist-subset";
    }
    return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "blobs") return DatasetKind::blobs;
    if (s == "spirals") return DatasetKind::spirals;
    if (s == "mnist-subset") return DatasetKind::mnist_subset;
    throw RangeError("unknown dataset kind '" + s + "'");
}

namespace {

void shuffle_split(Split& s, Rng& rng) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    Split out;
    for (std::size_t i : order) {
        out.inputs.push_back(std::move(s.inputs[i]));
        out.labels.push_back(s.labels[i]);
    }
    s = std::move(out);
}

// Points of each class are generated in order; the first 80% of each class
// go to train.
Dataset split_synthetic(std::vector<std::vector<Vector>> per_class, Rng& rng) {
    Dataset d;
    d.n_classes = per_class.size();
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        const std::size_t n_train = per_class[c].size() * 4 / 5;
        for (std::size_t i = 0; i < per_class[c].size(); ++i) {
            Split& s = i < n_train ? d.train : d.test;
            s.inputs.push_back(std::move(per_class[c][i]));
            s.labels.push_back(c);
        }
    }
    shuffle_split(d.train, rng);
    shuffle_split(d.test, rng);
    return d;
}

Dataset make_blobs(const DatasetSpec& spec) {
    Rng rng(spec.seed);
    std::vector<std::vector<Vector>> per_class(spec.n_classes);
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        const Vector center = gaussian_vector(spec.dim, spec.separation, rng);
        for (std::size_t i = 0; i < spec.per_class; ++i) per_class[c].push_back(center + gaussian_vector(spec.dim, spec.noise, rng));
    }
    return split_synthetic(std::move(per_class), rng);
}

Dataset make_spirals(const DatasetSpec& spec) {
    Rng rng(spec.seed);
    std::vector<std::vector<Vector>> per_class(spec.n_classes);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t c = 0; c < spec.n_classes; ++c) {
        const double phase = two_pi * static_cast<double>(c) / static_cast<double>(spec.n_classes);
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(spec.per_class);
            const double r = 0.2 + 2.0 * t;
            const double angle = phase + 1.5 * two_pi * t;
            Vector p{r * std::cos(angle), r * std::sin(angle)};
            p += gaussian_vector(2, spec.noise, rng);
            per_class[c].push_back(std::move(p));
        }
    }
    return split_synthetic(std::move(per_class), rng);
}

Split load_mnist_split(const std::string& images_path, const std::string& labels_path,
                       const std::vector<std::size_t>& classes, std::size_t cap) {
    const IdxImages images = read_idx_images(images_path);
    const auto labels = read_idx_labels(labels_path);
    if (labels.size() != images.count)
        throw FormatError(labels_path + ": " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(images.count) + " images");
    const std::size_t dim = images.rows * images.cols;
    std::vector<std::size_t> taken(classes.size(), 0);
    Split s;
    for (std::size_t i = 0; i < images.count; ++i) {
        if (labels[i] > 9) throw FormatError(labels_path + ": label " + std::to_string(labels[i]) + " at offset " + std::to_string(8 + i));
        const auto it = std::find(classes.begin(), classes.end(), labels[i]);
        if (it == classes.end()) continue;
        const auto c = static_cast<std::size_t>(it - classes.begin());
        if (cap != 0 && taken[c] >= cap) continue;
        ++taken[c];
        Vector x(dim);
        for (std::size_t p = 0; p < dim; ++p) x[p] = images.pixels[i * dim + p] / 255.0;
        s.inputs.push_back(std::move(x));
        s.labels.push_back(c);
    }
    return s;
}

Dataset make_mnist(const DatasetSpec& spec) {
    std::vector<std::size_t> classes = spec.classes;
    if (classes.empty()) {
        classes.resize(10);
        std::iota(classes.begin(), classes.end(), std::size_t{0});
    }
    for (std::size_t c : classes)
        if (c > 9) throw RangeError("mnist-subset: class " + std::to_string(c) + " is not a digit");
    if (std::set<std::size_t>(classes.begin(), classes.end()).size() != classes.size())
        throw RangeError("mnist-subset: duplicate class in whitelist");
    Dataset d;
    d.n_classes = classes.size();
    d.train = load_mnist_split(spec.train_images, spec.train_labels, classes, spec.cap_per_class);
    d.test = load_mnist_split(spec.test_images, spec.test_labels, classes, spec.test_cap_per_class);
    return d;
}

}  // namespace

Dataset make_dataset(const DatasetSpec& spec) {
    Dataset d;
    switch (spec.kind) {
        case DatasetKind::blobs:
            if (spec.n_classes < 2 || spec.per_class < 2 || spec.dim == 0) throw RangeError("blobs: need >= 2 classes, >= 2 points per class, dim >= 1");
            d = make_blobs(spec);
            break;
        case DatasetKind::spirals:
            if (spec.n_classes < 2 || spec.per_class < 2) throw RangeError("spirals: need >= 2 classes and >= 2 points per class");
            d = make_spirals(spec);
            break;
        case DatasetKind::mnist_subset:
            d = make_mnist(spec);
            break;
    }
    if (spec.noise < 0.0) throw RangeError("dataset: negative noise");
    d.validate();
    return d;
}

// ---------------------------------------------------------------- noise

const char* to_string(NoiseKind k) { return k == NoiseKind::gaussian ? "gaussian" : "fgsm"; }

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "fgsm") return NoiseKind::fgsm;
    throw RangeError("unknown noise kind '" + s + "'");
}

Vector gaussian_perturb(const Vector& x, const NoiseConfig& cfg, std::uint64_t stream) {
    if (cfg.kind != NoiseKind::gaussian) throw RangeError("gaussian_perturb: noise kind is not gaussian");
    if (cfg.sigma < 0.0) throw RangeError("gaussian_perturb: negative sigma");
    if (cfg.sigma == 0.0) return x;
    Rng rng = Rng(cfg.seed).derive(stream);
    return x + gaussian_vector(x.dim(), cfg.sigma, rng);
}

Vector fgsm_perturb(const Network& net, const Vector& x, const Vector& target, double epsilon, Loss loss) {
    if (epsilon < 0.0) throw RangeError("fgsm_perturb: negative epsilon");
    if (epsilon == 0.0) return x;
    const Matrix xs = Matrix::from_columns(std::span<const Vector>(&x, 1));
    const Matrix ys = Matrix::from_columns(std::span<const Vector>(&target, 1));
    const Gradients g = backward(net, xs, ys, loss, true);
    Vector out = x;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        const double d = g.inputs(i, 0);
        out[i] += d > 0.0 ? epsilon : (d < 0.0 ? -epsilon : 0.0);
    }
    return out;
}

Vector fgsm_perturb(const Network& net, const Vector& x, std::size_t label, double epsilon, Loss loss) {
    Vector target(net.output_dim());
    if (label >= target.dim()) throw RangeError("fgsm_perturb: label out of range");
    target[label] = 1.0;
    return fgsm_perturb(net, x, target, epsilon, loss);
}

Split perturb_split(const Network& net, const Split& split, std::size_t n_classes, const NoiseConfig& cfg) {
    Split out;
    out.labels = split.labels;
    out.inputs.reserve(split.size());
    if (cfg.kind == NoiseKind::gaussian) {
        for (std::size_t i = 0; i < split.size(); ++i) out.inputs.push_back(gaussian_perturb(split.inputs[i], cfg, i));
        return out;
    }
    if (cfg.epsilon < 0.0) throw RangeError("fgsm: negative epsilon");
    if (cfg.epsilon == 0.0 || split.size() == 0) return split;
    // One batched backward pass; per-sample input gradients only differ from
    // the single-sample ones by the positive 1/batch factor.
    const Matrix xs = batch_inputs(split, 0, split.size());
    const Matrix ys = one_hot(split.labels, n_classes);
    const Gradients g = backward(net, xs, ys, cfg.loss, true);
    for (std::size_t b = 0; b < split.size(); ++b) {
        Vector x = split.inputs[b];
        for (std::size_t i = 0; i < x.dim(); ++i) {
            const double d = g.inputs(i, b);
            x[i] += d > 0.0 ? cfg.epsilon : (d < 0.0 ? -cfg.epsilon : 0.0);
        }
        out.inputs.push_back(std::move(x));
    }
    return out;
}

VariationRates variation_rates(const Network& net, const Split& split, std::size_t n_classes, const NoiseConfig& cfg) {
    const Split noisy = perturb_split(net, split, n_classes, cfg);
    const auto clean_reps = representations(net, batch_inputs(split, 0, split.size()));
    const auto noisy_reps = representations(net, batch_inputs(noisy, 0, noisy.size()));
    VariationRates out;
    for (std::size_t l = 0; l < clean_reps.size(); ++l) {
        double sum = 0.0;
        std::size_t used = 0, skipped = 0;
        const Matrix& a = clean_reps[l];
        const Matrix& b = noisy_reps[l];
        for (std::size_t s = 0; s < a.cols(); ++s) {
            double base = 0.0, diff = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) {
                base += a(i, s) * a(i, s);
                const double d = a(i, s) - b(i, s);
                diff += d * d;
            }
            base = std::sqrt(base);
            if (base <= kDegenerateNorm) {
                ++skipped;
                continue;
            }
            sum += std::sqrt(diff) / base;
            ++used;
        }
        out.rate.push_back(used == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(used));
        out.skipped.push_back(skipped);
    }
    std::size_t hits = 0;
    const auto pred = predict(net, batch_inputs(noisy, 0, noisy.size()));
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == split.labels[i]) ++hits;
    out.noisy_accuracy = split.size() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(split.size());
    return out;
}

double variation_rate(const Network& net, const Split& split, std::size_t n_classes, const NoiseConfig& cfg,
                      std::size_t layer) {
    if (layer >= representation_count(net)) throw RangeError("variation_rate: layer index out of range");
    const VariationRates r = variation_rates(net, split, n_classes, cfg);
    if (std::isnan(r.rate[layer])) throw DegenerateTrackError("variation_rate: every sample has a null representation");
    return r.rate[layer];
}

RobustnessReport robustness_curve(const Network& net, const Split& split, std::size_t n_classes, NoiseKind kind,
                                  const std::vector<double>& levels, std::uint64_t seed, Loss loss) {
    RobustnessReport report;
    report.kind = kind;
    for (double level : levels) {
        if (!(level >= 0.0)) throw RangeError("robustness: noise levels must be nonnegative");
        NoiseConfig cfg;
        cfg.kind = kind;
        cfg.seed = seed;
        cfg.loss = loss;
        (kind == NoiseKind::gaussian ? cfg.sigma : cfg.epsilon) = level;
        VariationRates vr = variation_rates(net, split, n_classes, cfg);
        report.rows.push_back({level, vr.noisy_accuracy, std::move(vr.rate)});
    }
    return report;
}

// ---------------------------------------------------------------- units

std::size_t representation_index(const Network& net, std::size_t stage, std::size_t local) {
    const auto spans = stage_spans(net);
    if (stage >= spans.size()) throw RangeError("stage index out of range");
    if (local > spans[stage].segments) throw RangeError("layer index outside the stage");
    return spans[stage].first + local;
}

namespace {

void require_inside_stage(const Network& net, std::size_t layer) {
    for (const StageSpan& s : stage_spans(net))
        if (layer > s.first && layer <= s.first + s.segments) return;
    throw RangeError("layer " + std::to_string(layer) + " and its predecessor are not in one fixed-width stage");
}

}  // namespace

std::vector<std::vector<std::size_t>> important_units(const Network& net, const Split& train, std::size_t n_classes,
                                                      std::size_t layer, std::size_t k) {
    require_inside_stage(net, layer);
    const auto reps = representations(net, batch_inputs(train, 0, train.size()));
    const Matrix& h = reps[layer];
    if (k > h.rows()) throw RangeError("unit elimination: k = " + std::to_string(k) + " exceeds width " + std::to_string(h.rows()));
    std::vector<std::vector<double>> mean_abs(n_classes, std::vector<double>(h.rows(), 0.0));
    std::vector<std::size_t> count(n_classes, 0);
    for (std::size_t s = 0; s < h.cols(); ++s) {
        const std::size_t c = train.labels[s];
        ++count[c];
        for (std::size_t i = 0; i < h.rows(); ++i) mean_abs[c][i] += std::abs(h(i, s));
    }
    std::vector<std::vector<std::size_t>> units(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> order(h.rows());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto& m = mean_abs[c];
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m[a] > m[b]; });
        units[c].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return units;
}

double unit_elimination_eval(const Network& net, const Dataset& data, std::size_t layer, std::size_t k) {
    const auto units = important_units(net, data.train, data.n_classes, layer, k);
    if (data.test.size() == 0) return 0.0;
    const Matrix xs = batch_inputs(data.test, 0, data.test.size());
    const auto reps = representations(net, xs);
    const auto predicted = predict(net, xs);
    Matrix state = reps[layer];
    const Matrix& prev = reps[layer - 1];
    for (std::size_t s = 0; s < state.cols(); ++s)
        for (std::size_t u : units[predicted[s]]) state(u, s) = prev(u, s);
    const Matrix out = forward_from(net, layer, std::move(state));
    std::size_t hits = 0;
    for (std::size_t s = 0; s < out.cols(); ++s) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < out.rows(); ++i)
            if (out(i, s) > out(best, s)) best = i;
        if (best == data.test.labels[s]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.test.size());
}

// ---------------------------------------------------------------- metrics

std::vector<StageClouds> stage_clouds(const Network& net, const Split& split, std::size_t count) {
    count = std::min(count, split.size());
    if (count == 0) throw SizeError("stage_clouds: no samples");
    const auto reps = representations(net, batch_inputs(split, 0, count));
    std::vector<StageClouds> out;
    for (const StageSpan& span : stage_spans(net)) {
        std::vector<Vector> in, outp;
        for (std::size_t s = 0; s < count; ++s) {
            in.push_back(reps[span.first].column(s));
            outp.push_back(reps[span.first + span.segments].column(s));
        }
        out.push_back({EmpiricalMeasure(std::move(in)), EmpiricalMeasure(std::move(outp))});
    }
    return out;
}

std::vector<StageMetrics> evaluate_stages(const Network& net, const Split& train, const TrainConfig& cfg) {
    const std::size_t n_eval = std::min(cfg.eval_subset, train.size());
    const auto lss_stats = mean_stage_lss(net, batch_inputs(train, 0, n_eval));
    const auto clouds = stage_clouds(net, train, cfg.ot_subsample);
    std::vector<StageMetrics> out;
    for (std::size_t k = 0; k < clouds.size(); ++k) {
        const TransportSummary t = transport_summary(clouds[k].inputs, clouds[k].outputs);
        out.push_back({lss_stats[k].mean, lss_stats[k].skipped, t.ots, t.w2, clouds[k].inputs.size()});
    }
    return out;
}

// ---------------------------------------------------------------- sweeps

std::size_t thread_budget() {
    if (const char* env = std::getenv("GTL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

SweepRun run_one(const Architecture& arch, const Dataset& data, double gamma, TrainConfig cfg) {
    SweepRun run;
    run.row.arch = to_string(arch.type);
    run.row.gamma = gamma;
    cfg.gamma = gamma;
    try {
        TrainResult r = train(build_network(arch, cfg.seed), data, cfg);
        run.row.train_acc = accuracy(r.model, data.train);
        run.row.test_acc = accuracy(r.model, data.test);
        for (const StageMetrics& m : evaluate_stages(r.model, data.train, cfg)) {
            run.row.lss.push_back(m.lss);
            run.row.ots.push_back(m.ots);
            run.row.w2.push_back(m.w2);
        }
        run.row.weight_energy = weight_decay_energy(r.model);
        run.result = std::move(r);
    } catch (const DivergenceError& e) {
        run.row.ok = false;
        run.row.message = e.what();
    }
    return run;
}

}  // namespace

std::vector<SweepRun> gamma_sweep(const Architecture& arch, const Dataset& data, std::vector<double> gammas,
                                  const TrainConfig& cfg, std::size_t threads) {
    for (double g : gammas)
        if (!(g >= 0.0)) throw RangeError("gamma_sweep: gamma must be nonnegative");
    std::sort(gammas.begin(), gammas.end());
    if (std::adjacent_find(gammas.begin(), gammas.end()) != gammas.end())
        throw RangeError("gamma_sweep: gammas must be distinct");

    std::vector<SweepRun> runs(gammas.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < gammas.size(); i = next++) {
            try {
                runs[i] = run_one(arch, data, gammas[i], cfg);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, gammas.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

SweepReport report_of(const std::vector<SweepRun>& runs) {
    SweepReport r;
    for (const SweepRun& run : runs) r.rows.push_back(run.row);
    return r;
}

}  // namespace gtl
