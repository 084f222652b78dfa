#pragma once

// Datasets, gamma sweeps, and the noise / unit-elimination probes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gtl/dataset.hpp"
#include "gtl/network.hpp"

namespace gtl {

// ---------------------------------------------------------------- data

enum class DatasetKind { blobs, spirals, mnist_subset };

const char* to_string(DatasetKind k);
DatasetKind dataset_kind_from_string(const std::string& s);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::blobs;
    std::uint64_t seed = 0;
    // Synthetic data.
    std::size_t n_classes = 2;
    std::size_t per_class = 100;
    std::size_t dim = 2;       // blobs only; spirals are planar
    double noise = 0.5;        // Gaussian std around each center / along each arm
    double separation = 5.0;   // std of the random blob centers
    // MNIST subset.
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::vector<std::size_t> classes;  // whitelist; empty keeps all ten digits
    std::size_t cap_per_class = 0;     // 0 keeps every training image
    std::size_t test_cap_per_class = 0;
};

// Synthetic kinds split 80/20 per class; MNIST keeps the file split.
// Labels are remapped to positions in `classes`.
Dataset make_dataset(const DatasetSpec& spec);

struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

// Big-endian IDX readers (magic 0x00000803 images, 0x00000801 labels).
// FormatError messages name the offending byte offset.
IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const IdxImages& images);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// ---------------------------------------------------------------- noise

enum class NoiseKind { gaussian, fgsm };

const char* to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

struct NoiseConfig {
    NoiseKind kind = NoiseKind::gaussian;
    double sigma = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    Loss loss = Loss::cross_entropy;  // loss differentiated by FGSM
};

// x + e with e ~ N(0, sigma^2 I). `stream` selects an independent noise
// draw for the same seed (the sample index in dataset-wide probes).
Vector gaussian_perturb(const Vector& x, const NoiseConfig& cfg, std::uint64_t stream = 0);

// x + epsilon sign(dL/dx) for the given target column; sign(0) = 0.
Vector fgsm_perturb(const Network& net, const Vector& x, const Vector& target, double epsilon,
                    Loss loss = Loss::cross_entropy);
Vector fgsm_perturb(const Network& net, const Vector& x, std::size_t label, double epsilon,
                    Loss loss = Loss::cross_entropy);

// The perturbed copy of a split under cfg.
Split perturb_split(const Network& net, const Split& split, std::size_t n_classes, const NoiseConfig& cfg);

struct VariationRates {
    // rate[l] for representation l; NaN where every sample collapsed.
    std::vector<double> rate;
    std::vector<std::size_t> skipped;
    double noisy_accuracy = 0.0;
};

// Mean relative deviation |x(l) - x_noisy(l)| / |x(l)| over the split, for
// every representation at once. Samples with |x(l)| <= 1e-12 are skipped
// and counted.
VariationRates variation_rates(const Network& net, const Split& split, std::size_t n_classes,
                               const NoiseConfig& cfg);

// Single-layer form; throws DegenerateTrackError when every sample is skipped.
double variation_rate(const Network& net, const Split& split, std::size_t n_classes, const NoiseConfig& cfg,
                      std::size_t layer);

struct RobustnessRow {
    double level = 0.0;  // sigma or epsilon
    double accuracy = 0.0;
    std::vector<double> rate;  // variation rate per representation
};

struct RobustnessReport {
    NoiseKind kind = NoiseKind::gaussian;
    std::vector<RobustnessRow> rows;
};

// Noisy accuracy and variation rates over `split` at each noise level.
// Levels must be nonnegative; every level reuses the same noise seed.
RobustnessReport robustness_curve(const Network& net, const Split& split, std::size_t n_classes, NoiseKind kind,
                                  const std::vector<double>& levels, std::uint64_t seed,
                                  Loss loss = Loss::cross_entropy);

// ---------------------------------------------------------------- units

// Global representation index of state `local` inside stage `stage`.
std::size_t representation_index(const Network& net, std::size_t stage, std::size_t local);

// For each class, the k units with the largest mean |x(l)| over that class's
// training samples. Ties go to the lower unit index.
std::vector<std::vector<std::size_t>> important_units(const Network& net, const Split& train,
                                                      std::size_t n_classes, std::size_t layer, std::size_t k);

// Test accuracy when, for every test sample, the important units of its
// predicted class in x(l) are overwritten with the same units of x(l-1).
// Layer l and l-1 must lie in one fixed-width stage; k > width throws.
double unit_elimination_eval(const Network& net, const Dataset& data, std::size_t layer, std::size_t k);

// ---------------------------------------------------------------- metrics

struct StageMetrics {
    double lss = 0.0;  // mean over the evaluation subset
    std::size_t lss_skipped = 0;
    double ots = 0.0;
    double w2 = 0.0;
    std::size_t ot_samples = 0;
};

// Per-stage LSS over the first cfg.eval_subset training samples and OTS / W2
// between stage inputs and outputs of the first cfg.ot_subsample training
// samples (index-paired, fixed order).
std::vector<StageMetrics> evaluate_stages(const Network& net, const Split& train, const TrainConfig& cfg);

// Index-paired stage input and output clouds of the first `count` samples.
struct StageClouds {
    EmpiricalMeasure inputs;
    EmpiricalMeasure outputs;
};
std::vector<StageClouds> stage_clouds(const Network& net, const Split& split, std::size_t count);

// ---------------------------------------------------------------- sweeps

struct SweepRow {
    std::string arch;
    double gamma = 0.0;
    bool ok = true;
    std::string message;  // failure diagnostic when !ok
    double train_acc = 0.0;
    double test_acc = 0.0;
    std::vector<double> lss;
    std::vector<double> ots;
    std::vector<double> w2;
    double weight_energy = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

struct SweepRun {
    SweepRow row;
    std::optional<TrainResult> result;  // empty when training diverged
};

// One model per gamma from the same seed, rows sorted by gamma. Gammas must
// be distinct and nonnegative. Rows may train concurrently (see
// thread_budget); results do not depend on the thread count.
std::vector<SweepRun> gamma_sweep(const Architecture& arch, const Dataset& data, std::vector<double> gammas,
                                  const TrainConfig& cfg, std::size_t threads = 1);

SweepReport report_of(const std::vector<SweepRun>& runs);

// GTL_THREADS when set and positive, otherwise the hardware concurrency.
std::size_t thread_budget();

}  // namespace gtl
