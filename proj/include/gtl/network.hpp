#pragma once

// Bias-free ReLU networks built from plain and residual stages.
//
// A Network is  head o f_K o P_{K-1} o ... o P_1 o f_1 o lift,  where every
// stage f_k keeps its width fixed and the optional lift, changers P_k and
// head are plain linear maps. Internally the network is walked as a flat
// list of steps; representation 0 is the raw input and representation l is
// the output of step l.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gtl/dataset.hpp"
#include "gtl/geometry.hpp"
#include "gtl/numerics.hpp"

namespace gtl {

// g(x) = W_n relu(W_{n-1} ... relu(W_1 x)); the last layer is linear.
struct PlainNet {
    std::vector<Matrix> layers;
};

// v(x) = W2 relu(W1 relu(x)); the block maps x to x + v(x).
struct ResidualBlock {
    Matrix w1;
    Matrix w2;
};

struct ResNet {
    std::vector<ResidualBlock> blocks;
};

using Stage = std::variant<PlainNet, ResNet>;

struct Network {
    std::optional<Matrix> lift;
    std::vector<Stage> stages;
    // changers[k] maps the width of stages[k] to that of stages[k+1].
    std::vector<Matrix> changers;
    std::optional<Matrix> head;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    // Throws DimensionError if the composition is not shape-consistent.
    void validate() const;
};

enum class ArchType { plain, resnet };

const char* to_string(ArchType t);
ArchType arch_type_from_string(const std::string& s);

struct Architecture {
    ArchType type = ArchType::resnet;
    std::size_t input_dim = 0;
    std::vector<std::size_t> stage_widths;
    std::size_t blocks_per_stage = 1;
    std::size_t output_dim = 0;
};

// He-initialized network. A plain stage gets two layers per block so that
// plain and residual networks built from the same seed carry identical
// weight matrices; the plain variant is the residual one with the identity
// maps removed.
Network build_network(const Architecture& arch, std::uint64_t seed);

// Every weight matrix in a fixed order: lift, then per stage its layers (or
// W1, W2 per block) followed by the changer, then the head.
std::vector<Matrix*> weights(Network& net);
std::vector<const Matrix*> weights(const Network& net);

// Zero matrices shaped like net.
Network zeros_like(const Network& net);

// Where each stage's track lives in the representation list.
struct StageSpan {
    std::size_t first = 0;     // representation index of the stage input
    std::size_t segments = 0;  // layers or blocks in the stage
};
std::vector<StageSpan> stage_spans(const Network& net);
std::size_t representation_count(const Network& net);

Vector forward(const Network& net, const Vector& x);
// Columns are samples.
Matrix forward_batch(const Network& net, const Matrix& inputs);
// All representations, index 0 being the inputs themselves.
std::vector<Matrix> representations(const Network& net, const Matrix& inputs);
// Runs the steps after representation `index`, starting from `state`.
Matrix forward_from(const Network& net, std::size_t index, Matrix state);

struct ForwardTrace {
    Vector output;
    std::vector<Track> tracks;  // one per stage
};
ForwardTrace forward_with_track(const Network& net, const Vector& x);
// tracks[k][b] is sample b's track through stage k.
std::vector<std::vector<Track>> stage_tracks(const Network& net, const Matrix& inputs);

enum class Loss { cross_entropy, mse };

const char* to_string(Loss l);
Loss loss_from_string(const std::string& s);

// Mean over columns.
double batch_loss(const Matrix& outputs, const Matrix& targets, Loss loss);

struct Gradients {
    Network weights;     // same shape as the network
    Matrix inputs;       // d loss / d inputs, one column per sample
    double loss = 0.0;   // mean batch loss, without the weight-decay term
};

// Exact reverse-mode gradients of the mean batch loss. The ReLU derivative
// at exactly 0 is taken to be 0.
Gradients backward(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss,
                   bool want_input_gradients = true);

struct TrainConfig {
    double gamma = 0.0;  // weight-decay coefficient
    double lr = 0.05;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    Loss loss = Loss::cross_entropy;
    std::uint64_t seed = 1;
    std::size_t ot_subsample = 512;
    // Training samples (from the front) used for per-epoch LSS.
    std::size_t eval_subset = 256;
};

// W <- W - lr (dL/dW + 2 gamma W) for every weight matrix.
void sgd_step_inplace(Network& net, const Network& grads, const TrainConfig& cfg);
Network sgd_step(Network net, const Network& grads, const TrainConfig& cfg);

double weight_decay_energy(const Network& net);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;  // mean data loss over the epoch's batches
    double train_acc = 0.0;
    double test_acc = 0.0;
    std::vector<double> mean_lss;  // per stage
    double weight_energy = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    Network model;
    TrainLog log;
};

// Minibatch SGD with shuffling drawn from cfg.seed. Throws DivergenceError
// when the loss stops being finite.
TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg);

double accuracy(const Network& net, const Split& split);
std::vector<std::size_t> predict(const Network& net, const Matrix& inputs);

// Mean LSS per stage over the given inputs; collapsed tracks (and tracks
// whose normalized chord collapses) are skipped and counted.
struct StageLss {
    double mean = 0.0;
    std::size_t skipped = 0;
};
std::vector<StageLss> mean_stage_lss(const Network& net, const Matrix& inputs);

// W~_x = W_x^(n) ... W_x^(1): the weight product with rows of inactive
// units zeroed, so that g(x) = W~_x x.
Matrix activated_linear_map(const PlainNet& net, const Vector& x);
Vector forward(const PlainNet& net, const Vector& x);

struct VariationCheck {
    Matrix observed;
    Matrix predicted;
};

// One row-wise gradient step W'[j,:] = W[j,:] - delta G[j,:] X_j^T on a
// layer relu(W X), where X_j keeps only the columns that activate row j.
// observed = relu(W' X) - relu(W X), predicted = -delta G[j,:] X_j^T X_j.
// Throws PatternInstabilityError if the step flips any activation.
VariationCheck gd_variation_check(const Matrix& w, const Matrix& x, const Matrix& g, double delta);

// Row vector w minimizing |Y - w X|^2 + gamma |w|^2, i.e.
// (X X^T + gamma I) w^T = X Y^T. X is d x m, Y is 1 x m, gamma > 0.
Vector ridge_solve(const Matrix& x, const Matrix& y, double gamma);

struct EnergyBound {
    double lhs = 0.0;
    double rhs = 0.0;
    double symmetric_rhs = 0.0;  // residual blocks only
};

// lhs = mean |v(x)|^2, rhs = |W2|_F^2 |W1|_F^2 mean |x|^2,
// symmetric_rhs = (|W1|_F^2 + |W2|_F^2)^2 / 4 * mean |x|^2.
EnergyBound block_energy_bound(const ResidualBlock& block, const EmpiricalMeasure& samples);

// lhs = mean |relu(W x) - x|^2, rhs = mean (|W|_F^2 + 1) |x|^2. The bound
// needs x >= 0 componentwise (the inputs of every inner plain layer are
// ReLU outputs); negative samples raise RangeError.
EnergyBound plain_layer_energy_bound(const Matrix& w, const EmpiricalMeasure& samples);

}  // namespace gtl
