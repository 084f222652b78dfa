// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gtl/cli.hpp"
#include "gtl/io.hpp"
#include "support.hpp"

using namespace gtl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kLapTol = 1e-9;
constexpr double kLapSeconds = 10.0;
constexpr double kMetricTol = 1e-9;
constexpr double kGeodesicRelTol = 1e-6;
constexpr double kSeparationTol = 1e-9;
constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-5;
constexpr double kActivatedRelTol = 1e-12;
constexpr double kEnergyTol = 1e-9;
constexpr double kVariationTol = 1e-9;
constexpr double kRidgeResidualTol = 1e-9;
constexpr double kRidgeGdTol = 1e-6;
constexpr double kFloorTol = 1e-12;
constexpr double kTrendSeconds = 15.0 * 60.0;
constexpr double kTrendMinAccuracy = 0.97;
constexpr double kRobustFraction = 0.8;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.2e", v); }

// ---------------------------------------------------------------- 1-4

Outcome lap_exactness() {
    Rng rng(101);
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 2; m <= 7; ++m)
        for (int trial = 0; trial < 200; ++trial) {
            const CostMatrix c = trial % 4 == 0 ? test::random_integer_costs(m, 5, rng) : test::random_costs(m, rng);
            worst = std::max(worst, std::abs(solve_lap(c).total_cost - brute_force_lap(c).total_cost));
            ++count;
        }
    const double secs = seconds_since(t0);
    return {worst <= kLapTol && secs < kLapSeconds,
            std::to_string(count) + " matrices, max |fast - exhaustive| " + sci(worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome w2_axioms() {
    Rng rng(102);
    double sym = 0.0, tri = 0.0, perm = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const EmpiricalMeasure a = test::random_cloud(16, 8, rng);
        const EmpiricalMeasure b = test::random_cloud(16, 8, rng, 1.5);
        const EmpiricalMeasure c = test::random_cloud(16, 8, rng, 0.5);
        const double ab = wasserstein2(a, b), bc = wasserstein2(b, c), ac = wasserstein2(a, c);
        sym = std::max(sym, std::abs(ab - wasserstein2(b, a)));
        tri = std::max(tri, ac - (ab + bc));
        std::vector<std::size_t> p(16);
        std::iota(p.begin(), p.end(), std::size_t{0});
        rng.shuffle(p);
        perm = std::max(perm, wasserstein2(a, a.permuted(p)));
    }
    return {sym <= kMetricTol && tri <= kMetricTol && perm <= kMetricTol,
            "100 triples, max asymmetry " + sci(sym) + ", max triangle excess " + sci(tri) + ", max W2(a, perm a) " +
                sci(perm)};
}

Outcome constant_speed_geodesic() {
    Rng rng(103);
    double worst = 0.0;
    const double grid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int trial = 0; trial < 20; ++trial) {
        const EmpiricalMeasure a = test::random_cloud(16, 4, rng);
        const EmpiricalMeasure b = test::random_cloud(16, 4, rng, 2.0);
        const auto pairs = optimal_pairs(a, b);
        const double total = wasserstein2(a, b);
        for (double t : grid)
            for (double s : grid) {
                const double w = wasserstein2(geodesic_interpolate(pairs, t), geodesic_interpolate(pairs, s));
                worst = std::max(worst, std::abs(w - std::abs(t - s) * total) / total);
            }
    }
    return {worst <= kGeodesicRelTol, "20 cloud pairs x 25 (t, s), max relative deviation " + sci(worst)};
}

Outcome theorem1() {
    Rng rng(104);
    std::size_t pairs_checked = 0, violations = 0, monotone_violations = 0;
    double worst_gap = INFINITY;
    while (pairs_checked < 1000) {
        const std::size_t d = 2 + rng.below(3);
        const EmpiricalMeasure a = test::random_cloud(12, d, rng);
        const EmpiricalMeasure b = test::random_cloud(12, d, rng, rng.uniform(0.5, 3.0));
        const auto pairs = optimal_pairs(a, b);
        for (std::size_t p = 0; p < pairs.size() && pairs_checked < 1000; ++p)
            for (std::size_t q = p + 1; q < pairs.size() && pairs_checked < 1000; ++q, ++pairs_checked) {
                const Vector ds = pairs[p].source - pairs[q].source;
                const Vector dt = pairs[p].target - pairs[q].target;
                if (dot(dt, ds) < -kSeparationTol) ++monotone_violations;
                const double bound = theorem1_bound(pairs[p].source, pairs[q].source, pairs[p].target, pairs[q].target);
                double best = INFINITY;
                for (int k = 0; k <= 10000; ++k) {
                    const double t = k / 10000.0;
                    best = std::min(best, norm((1.0 - t) * ds + t * dt));
                }
                worst_gap = std::min(worst_gap, best - bound);
                if (best < bound - kSeparationTol) ++violations;
            }
    }
    return {violations == 0 && monotone_violations == 0,
            std::to_string(pairs_checked) + " pairs, " + std::to_string(violations) + " bound violations, " +
                std::to_string(monotone_violations) + " monotonicity violations, min (grid min - bound) " +
                sci(worst_gap)};
}

// ---------------------------------------------------------------- 5-10

Outcome gradient_correctness() {
    Rng rng(105);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const ArchType type = trial % 2 ? ArchType::plain : ArchType::resnet;
        const Loss loss = trial % 4 < 2 ? Loss::cross_entropy : Loss::mse;
        const Network net = test::random_network(rng, type, 16, 3);
        const std::size_t batch = 1 + rng.below(4);
        const Matrix x = test::random_matrix(net.input_dim(), batch, rng);
        Matrix t;
        if (loss == Loss::mse) {
            t = test::random_matrix(net.output_dim(), batch, rng);
        } else {
            std::vector<std::size_t> labels;
            for (std::size_t b = 0; b < batch; ++b) labels.push_back(rng.below(net.output_dim()));
            t = one_hot(labels, net.output_dim());
        }
        worst = std::max(worst, test::max_fd_relative_error(net, x, t, loss, 100, rng, kFdStep));
    }
    return {worst <= kFdRelTol, "20 nets x 100 coordinates, max relative error " + sci(worst)};
}

Outcome activated_map_identity() {
    Rng rng(106);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t depth = 1 + rng.below(6);
        PlainNet net;
        std::size_t width = 1 + rng.below(16);
        for (std::size_t l = 0; l < depth; ++l) {
            const std::size_t next = 1 + rng.below(16);
            net.layers.push_back(test::random_matrix(next, width, rng, std::sqrt(2.0 / static_cast<double>(width))));
            width = next;
        }
        const Vector x = gaussian_vector(net.layers.front().cols(), rng.uniform(0.1, 10.0), rng);
        const Vector out = forward(net, x);
        worst = std::max(worst, norm(out - matvec(activated_linear_map(net, x), x)) / (1.0 + norm(out)));
    }
    return {worst <= kActivatedRelTol, "500 (net, x) pairs, max |g(x) - W~x| / (1 + |g(x)|) " + sci(worst)};
}

Outcome energy_bounds() {
    Rng rng(107);
    std::size_t violations = 0;
    double worst = -INFINITY;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + rng.below(10), m = 1 + rng.below(20);
        const double scale = rng.uniform(0.05, 3.0);
        const ResidualBlock block{test::random_matrix(d, d, rng, scale), test::random_matrix(d, d, rng, scale)};
        const EmpiricalMeasure cloud = test::random_cloud(m, d, rng, rng.uniform(0.1, 5.0));
        const EnergyBound b = block_energy_bound(block, cloud);
        std::vector<Vector> pos;
        for (std::size_t i = 0; i < m; ++i) pos.push_back(relu(cloud[i]));
        const EnergyBound p = plain_layer_energy_bound(test::random_matrix(d, d, rng, scale), EmpiricalMeasure(pos));
        for (const double excess : {b.lhs - b.rhs, b.rhs - b.symmetric_rhs, p.lhs - p.rhs}) {
            worst = std::max(worst, excess);
            if (excess > kEnergyTol) ++violations;
        }
    }
    return {violations == 0, "1000 blocks and layers, " + std::to_string(violations) + " violations, max (lhs - rhs) " +
                                 sci(worst)};
}

Outcome variation_identity() {
    Rng rng(108);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = 1 + rng.below(8), dim = 1 + rng.below(8), m = 1 + rng.below(8);
        const test::VariationInstance v = test::random_variation_instance(rows, dim, m, rng);
        const VariationCheck c = gd_variation_check(v.w, v.x, v.g, std::pow(10.0, rng.uniform(-8.0, -6.0)));
        worst = std::max(worst, max_abs_diff(c.observed, c.predicted));
    }
    return {worst <= kVariationTol, "100 frozen-pattern instances, max |observed - predicted| " + sci(worst)};
}

double largest_eigenvalue(const Matrix& a) {
    Vector v(a.rows(), 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        const Vector w = matvec(a, v);
        lambda = norm(w);
        if (lambda == 0.0) return 0.0;
        v = (1.0 / lambda) * w;
    }
    return lambda;
}

Outcome ridge_closed_form() {
    Rng rng(109);
    double worst_residual = 0.0, worst_gd = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + rng.below(5), m = 2 * d + rng.below(10);
        const Matrix x = test::random_matrix(d, m, rng, 1.0 / std::sqrt(static_cast<double>(m)));
        const Matrix y = test::random_matrix(1, m, rng);
        const double gamma = std::exp(rng.uniform(std::log(0.01), std::log(1.0)));
        const Vector w = ridge_solve(x, y, gamma);

        Matrix a = matmul_nt(x, x);
        for (std::size_t i = 0; i < d; ++i) a(i, i) += gamma;
        const Vector xyt = matvec(x, Vector(std::vector<double>(y.values())));
        worst_residual = std::max(worst_residual, norm(matvec(a, w) - xyt) / norm(xyt));

        // Gradient descent on |Y - wX|^2 + gamma |w|^2 from zero.
        const double step = 1.0 / (2.0 * largest_eigenvalue(a));
        Vector g(d);
        for (int it = 0; it < 10000; ++it) g = g - (2.0 * step) * (matvec(a, g) - xyt);
        worst_gd = std::max(worst_gd, norm(g - w));
    }
    return {worst_residual <= kRidgeResidualTol && worst_gd <= kRidgeGdTol,
            "100 instances, max relative residual " + sci(worst_residual) + ", max |w_gd - w| " + sci(worst_gd)};
}

Outcome shape_floors() {
    Rng rng(110);
    double low_lss = INFINITY, low_lsr = INFINITY;
    std::size_t skipped = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Track t = test::random_track(1 + rng.below(10), 1 + rng.below(6), rng);
        low_lss = std::min(low_lss, lss(t));
        try {
            low_lsr = std::min(low_lsr, lsr(t));
        } catch (const DegenerateTrackError&) {
            ++skipped;
        }
    }
    double straight = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + rng.below(8);
        const Track t = straight_line_track(gaussian_vector(d, 1.0, rng), gaussian_vector(d, 1.0, rng), 1 + rng.below(12));
        straight = std::max({straight, std::abs(lss(t) - 1.0), std::abs(lsr(t) - 1.0)});
    }
    return {low_lss >= 1.0 - kFloorTol && low_lsr >= 1.0 - kFloorTol && straight <= kFloorTol,
            "10000 tracks, min lss " + fmt("%.15f", low_lss) + ", min lsr " + fmt("%.15f", low_lsr) + " (" +
                std::to_string(skipped) + " closed tracks skipped), straight-line deviation " + sci(straight)};
}

// ---------------------------------------------------------------- 11-13

struct Paths {
    fs::path data;
    fs::path work;
};

json trend_config(const Paths& p, const std::string& out_dir) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["dataset"] = {{"kind", "mnist-subset"},
                    {"train_images", (p.data / "train-images-idx3-ubyte").string()},
                    {"train_labels", (p.data / "train-labels-idx1-ubyte").string()},
                    {"test_images", (p.data / "t10k-images-idx3-ubyte").string()},
                    {"test_labels", (p.data / "t10k-labels-idx1-ubyte").string()},
                    {"classes", {0, 1}},
                    {"cap_per_class", 500}};
    j["architecture"] = {{"type", "resnet"}, {"stage_widths", {64}}, {"blocks_per_stage", 5}};
    j["train"] = {{"lr", 0.05},       {"epochs", 100},        {"batch_size", 64},   {"loss", "cross-entropy"},
                  {"seed", 1},        {"ot_subsample", 512},  {"eval_subset", 256}};
    j["sweep"] = {{"gammas", {0.0, 1e-4, 1e-3, 1e-2}}, {"architectures", {"resnet", "plain"}}};
    j["output"] = {{"dir", out_dir}, {"formats", {"csv", "json"}}};
    return j;
}

// Runs the sweep through the command line with its console output muted.
int run_sweep(const Paths& p, const std::string& name) {
    const fs::path out = p.work / name;
    fs::remove_all(out);
    fs::create_directories(p.work);
    const std::string cfg = (p.work / (name + ".json")).string();
    write_file_atomic(cfg, dump_json(trend_config(p, out.string())));
    const std::vector<const char*> argv{"gtl", "sweep", "--config", cfg.c_str()};
    std::ostringstream sink;
    std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
    const int code = run_cli(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(saved);
    return code;
}

struct TrendRow {
    double gamma = 0.0;
    bool ok = false;
    double test_acc = 0.0;
    double lss = NAN;
    double ots = NAN;
};

std::map<std::string, std::vector<TrendRow>> read_sweep(const fs::path& dir) {
    const json j = json::parse(read_file_bytes((dir / "sweep.json").string()));
    std::map<std::string, std::vector<TrendRow>> out;
    for (const json& r : j.at("rows")) {
        TrendRow row;
        row.gamma = r.at("gamma").get<double>();
        row.ok = r.at("ok").get<bool>();
        if (row.ok) {
            row.test_acc = r.at("test_acc").get<double>();
            row.lss = r.at("lss").at(0).is_null() ? NAN : r.at("lss").at(0).get<double>();
            row.ots = r.at("ots").at(0).get<double>();
        }
        out[r.at("arch").get<std::string>()].push_back(row);
    }
    return out;
}

std::size_t inversions(const std::vector<TrendRow>& rows) {
    std::size_t n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].lss <= rows[i - 1].lss)) ++n;
    return n;
}

std::string series(const std::vector<TrendRow>& rows, double TrendRow::*field) {
    std::string s;
    for (const TrendRow& r : rows) s += (s.empty() ? "" : " ") + fmt("%.3g", r.*field);
    return s;
}

std::string gamma_tag(double g) {
    std::string s = format_double(g);
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

struct TrendState {
    bool ran = false;
    int exit_code = -1;
    double seconds = 0.0;
    std::map<std::string, std::vector<TrendRow>> rows;
};

Outcome trend_reproduction(const Paths& p, TrendState& st) {
    if (!fs::exists(p.data / "train-images-idx3-ubyte"))
        return {false, "MNIST IDX files not found under " + p.data.string()};
    const auto t0 = Clock::now();
    st.exit_code = run_sweep(p, "run1");
    st.seconds = seconds_since(t0);
    st.ran = true;
    if (st.exit_code != kExitOk) return {false, "sweep exited with code " + std::to_string(st.exit_code)};
    st.rows = read_sweep(p.work / "run1");
    const auto& res = st.rows.at("resnet");
    const auto& plain = st.rows.at("plain");
    bool all_ok = res.size() == 4 && plain.size() == 4;
    for (const auto* rows : {&res, &plain})
        for (const TrendRow& r : *rows) all_ok = all_ok && r.ok;
    if (!all_ok) return {false, "a sweep row failed to train"};

    const bool a = inversions(res) <= 1 && inversions(plain) <= 1;
    bool b = true, c = true;
    for (std::size_t i = 0; i < 4; ++i) {
        b = b && res[i].lss <= plain[i].lss;
        c = c && res[i].ots >= plain[i].ots;
    }
    double best_res = 0.0, best_plain = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        best_res = std::max(best_res, res[i].test_acc);
        best_plain = std::max(best_plain, plain[i].test_acc);
    }
    const bool d = best_res >= kTrendMinAccuracy && best_plain >= kTrendMinAccuracy;
    const bool fast = st.seconds < kTrendSeconds;
    const auto mark = [](bool ok) { return ok ? "ok" : "FAIL"; };
    std::string detail = std::string("(a) ") + mark(a) + ": LSS resnet [" + series(res, &TrendRow::lss) + "] " +
                         std::to_string(inversions(res)) + " inversions, plain [" + series(plain, &TrendRow::lss) +
                         "] " + std::to_string(inversions(plain)) + " inversions; (b) " + mark(b) + "; (c) " + mark(c) +
                         ": OTS resnet [" + series(res, &TrendRow::ots) + "] plain [" + series(plain, &TrendRow::ots) +
                         "]; (d) " + mark(d) + ": best test acc resnet " + fmt("%.3f", best_res) + " plain " +
                         fmt("%.3f", best_plain) + "; " + fmt("%.0f", st.seconds) + " s";
    return {a && b && c && d && fast, detail};
}

struct RobustnessWins {
    std::size_t gaussian = 0;
    std::size_t fgsm = 0;
    std::string curves;
};

// Levels (out of 10 per noise kind) where the ResNet is at least as accurate.
RobustnessWins robustness_wins(const Network& rn, const Network& pn, const Dataset& data, std::uint64_t seed) {
    std::vector<double> gaussian, fgsm;
    for (int i = 1; i <= 10; ++i) {
        gaussian.push_back(0.1 * i);
        fgsm.push_back(0.02 * i);
    }
    RobustnessWins w;
    for (const auto& [kind, levels] : {std::pair{NoiseKind::gaussian, gaussian}, std::pair{NoiseKind::fgsm, fgsm}}) {
        const RobustnessReport r = robustness_curve(rn, data.test, data.n_classes, kind, levels, seed);
        const RobustnessReport q = robustness_curve(pn, data.test, data.n_classes, kind, levels, seed);
        std::size_t wins = 0;
        std::string ra, qa;
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (r.rows[i].accuracy >= q.rows[i].accuracy) ++wins;
            ra += (ra.empty() ? "" : " ") + fmt("%.3f", r.rows[i].accuracy);
            qa += (qa.empty() ? "" : " ") + fmt("%.3f", q.rows[i].accuracy);
        }
        (kind == NoiseKind::gaussian ? w.gaussian : w.fgsm) = wins;
        w.curves += std::string(w.curves.empty() ? "" : "; ") + to_string(kind) + " resnet [" + ra + "] plain [" + qa + "]";
    }
    return w;
}

Outcome robustness_ordering(const Paths& p, const TrendState& st) {
    if (!st.ran || st.exit_code != kExitOk) return {false, "needs the criterion 11 sweep"};
    const auto& res = st.rows.at("resnet");
    const auto& plain = st.rows.at("plain");
    // Matched clean accuracy: the gamma where the weaker model is strongest.
    std::size_t pick = 0;
    double pick_acc = -1.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const double m = std::min(res[i].test_acc, plain[i].test_acc);
        if (m > pick_acc) {
            pick_acc = m;
            pick = i;
        }
    }
    const fs::path ckpts = p.work / "run1" / "checkpoints";
    const auto model = [&](const char* arch, double gamma) {
        return load_checkpoint((ckpts / (std::string(arch) + "_gamma_" + gamma_tag(gamma) + ".json")).string()).model;
    };
    const RunConfig rc = parse_run_config(trend_config(p, (p.work / "run1").string()));
    const Dataset data = make_dataset(rc.dataset);
    const std::size_t needed = static_cast<std::size_t>(std::ceil(kRobustFraction * 10.0));

    std::string detail, others;
    bool pass = false;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const Network rn = model("resnet", res[i].gamma), pn = model("plain", res[i].gamma);
        const RobustnessWins w = robustness_wins(rn, pn, data, rc.train.seed);
        const std::string counts = std::to_string(w.gaussian) + "/10 gaussian, " + std::to_string(w.fgsm) + "/10 fgsm";
        if (i != pick) {
            others += (others.empty() ? "" : ", ") + std::string("gamma ") + format_double(res[i].gamma) + " " + counts;
            continue;
        }
        pass = w.gaussian >= needed && w.fgsm >= needed;
        detail = "gamma " + format_double(res[i].gamma) + " (clean acc resnet " + fmt("%.3f", res[i].test_acc) +
                 " plain " + fmt("%.3f", plain[i].test_acc) + "): resnet >= plain at " + counts + " (" + w.curves + ")";
        // Unit elimination at k = width / 4, reported alongside.
        const double rdrop = accuracy(rn, data.test) - unit_elimination_eval(rn, data, representation_index(rn, 0, 5), 16);
        const double pdrop = accuracy(pn, data.test) - unit_elimination_eval(pn, data, representation_index(pn, 0, 10), 16);
        detail += "; unit elimination k=16 accuracy drop resnet " + fmt("%.3f", rdrop) + " plain " + fmt("%.3f", pdrop);
    }
    return {pass, detail + "; other gammas: " + others};
}

std::vector<fs::path> files_under(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    std::sort(out.begin(), out.end());
    return out;
}

Outcome determinism(const Paths& p, const TrendState& st) {
    if (!st.ran || st.exit_code != kExitOk) return {false, "needs the criterion 11 sweep"};
    const int code = run_sweep(p, "run2");
    if (code != kExitOk) return {false, "second sweep exited with code " + std::to_string(code)};
    const auto a = files_under(p.work / "run1"), b = files_under(p.work / "run2");
    if (a != b) return {false, "the two runs wrote different file sets"};
    std::size_t differing = 0, checkpoints = 0, csvs = 0;
    std::string first_diff;
    for (const fs::path& f : a) {
        if (read_file_bytes((p.work / "run1" / f).string()) != read_file_bytes((p.work / "run2" / f).string())) {
            ++differing;
            if (first_diff.empty()) first_diff = f.string();
        }
        if (f.extension() == ".csv") ++csvs;
        if (f.parent_path() == "checkpoints") ++checkpoints;
    }
    return {differing == 0 && checkpoints == 8 && csvs >= 1,
            std::to_string(a.size()) + " files compared (" + std::to_string(checkpoints) + " checkpoints, " +
                std::to_string(csvs) + " CSVs), " + std::to_string(differing) + " differ" +
                (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-13"};
    std::string data = "data/mnist";
    std::string work = (fs::temp_directory_path() / "gtl_acceptance").string();
    std::vector<int> only;
    app.add_option("--data", data, "Directory holding the MNIST IDX files");
    app.add_option("--work", work, "Scratch directory for the sweep runs");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const Paths paths{fs::absolute(data), fs::absolute(work)};
    TrendState trend;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"LAP exactness", lap_exactness},
        {"W2 metric axioms", w2_axioms},
        {"constant-speed geodesic", constant_speed_geodesic},
        {"separation bound and monotonicity", theorem1},
        {"gradient correctness", gradient_correctness},
        {"activated-map identity", activated_map_identity},
        {"energy bounds", energy_bounds},
        {"gradient-step variation identity", variation_identity},
        {"ridge closed form", ridge_closed_form},
        {"LSS/LSR floors", shape_floors},
        {"desk-scale trend reproduction", [&] { return trend_reproduction(paths, trend); }},
        {"robustness ordering", [&] { return robustness_ordering(paths, trend); }},
        {"determinism", [&] { return determinism(paths, trend); }},
    };

    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s criterion %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
