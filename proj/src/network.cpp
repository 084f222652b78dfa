#include "gtl/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <type_traits>

namespace gtl {

// ---------------------------------------------------------------- dataset

void Dataset::validate() const {
    for (const Split* s : {&train, &test}) {
        if (s->inputs.size() != s->labels.size()) throw SizeError("dataset: inputs and labels misaligned");
        for (std::size_t i = 0; i < s->size(); ++i) {
            if (s->labels[i] >= n_classes) throw RangeError("dataset: label out of range");
            if (s->inputs[i].dim() != dim()) throw DimensionError("dataset: inputs of unequal dimension");
        }
    }
}

Matrix batch_inputs(const Split& split, std::size_t first, std::size_t count) {
    if (first + count > split.size()) throw SizeError("batch_inputs: range past the end of the split");
    const std::size_t d = count == 0 ? 0 : split.inputs[first].dim();
    Matrix m(d, count);
    for (std::size_t b = 0; b < count; ++b) {
        const Vector& x = split.inputs[first + b];
        for (std::size_t i = 0; i < d; ++i) m(i, b) = x[i];
    }
    return m;
}

Matrix batch_inputs(const Split& split, const std::vector<std::size_t>& indices) {
    const std::size_t d = indices.empty() ? 0 : split.inputs.at(indices[0]).dim();
    Matrix m(d, indices.size());
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const Vector& x = split.inputs.at(indices[b]);
        for (std::size_t i = 0; i < d; ++i) m(i, b) = x[i];
    }
    return m;
}

Matrix one_hot(const std::vector<std::size_t>& labels, std::size_t n_classes) {
    Matrix m(n_classes, labels.size());
    for (std::size_t b = 0; b < labels.size(); ++b) {
        if (labels[b] >= n_classes) throw RangeError("one_hot: label out of range");
        m(labels[b], b) = 1.0;
    }
    return m;
}

// ---------------------------------------------------------------- structure

namespace {

enum class StepKind { linear, relu_linear, residual };

template <class M>
struct StepT {
    StepKind kind;
    M* a;
    M* b;  // W2 of a residual block
};

template <class Net>
auto steps_of(Net& net) {
    using M = std::conditional_t<std::is_const_v<Net>, const Matrix, Matrix>;
    std::vector<StepT<M>> steps;
    if (net.lift) steps.push_back({StepKind::linear, &*net.lift, nullptr});
    for (std::size_t k = 0; k < net.stages.size(); ++k) {
        auto& stage = net.stages[k];
        if (auto* plain = std::get_if<PlainNet>(&stage)) {
            for (std::size_t l = 0; l < plain->layers.size(); ++l) {
                const bool last = l + 1 == plain->layers.size();
                steps.push_back({last ? StepKind::linear : StepKind::relu_linear, &plain->layers[l], nullptr});
            }
        } else {
            for (auto& block : std::get<ResNet>(stage).blocks)
                steps.push_back({StepKind::residual, &block.w1, &block.w2});
        }
        if (k < net.changers.size()) steps.push_back({StepKind::linear, &net.changers[k], nullptr});
    }
    if (net.head) steps.push_back({StepKind::linear, &*net.head, nullptr});
    return steps;
}

std::size_t stage_segments(const Stage& s) {
    if (const auto* p = std::get_if<PlainNet>(&s)) return p->layers.size();
    return std::get<ResNet>(s).blocks.size();
}

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

std::size_t Network::input_dim() const {
    const auto steps = steps_of(*this);
    if (steps.empty()) throw DimensionError("network: no layers");
    return steps.front().a->cols();
}

std::size_t Network::output_dim() const {
    const auto steps = steps_of(*this);
    if (steps.empty()) throw DimensionError("network: no layers");
    const auto& s = steps.back();
    return s.kind == StepKind::residual ? s.b->rows() : s.a->rows();
}

void Network::validate() const {
    if (!stages.empty() && changers.size() != stages.size() - 1)
        throw DimensionError("network: expected " + std::to_string(stages.size() - 1) + " changers, found " +
                             std::to_string(changers.size()));
    if (stages.empty() && !changers.empty()) throw DimensionError("network: changers without stages");
    for (const Stage& s : stages)
        if (stage_segments(s) == 0) throw DimensionError("network: empty stage");
    const auto steps = steps_of(*this);
    if (steps.empty()) throw DimensionError("network: no layers");
    std::size_t width = steps.front().a->cols();
    for (const auto& s : steps) {
        if (s.kind == StepKind::residual) {
            if (s.a->rows() != width || s.a->cols() != width || s.b->rows() != width || s.b->cols() != width)
                throw DimensionError("network: residual block " + shape(*s.a) + "/" + shape(*s.b) +
                                     " does not match width " + std::to_string(width));
        } else {
            if (s.a->cols() != width)
                throw DimensionError("network: layer " + shape(*s.a) + " cannot follow width " +
                                     std::to_string(width));
            width = s.a->rows();
        }
    }
    // Plain stages must keep their width so the track lives in one space.
    for (const Stage& s : stages) {
        if (const auto* p = std::get_if<PlainNet>(&s)) {
            const std::size_t d = p->layers.front().cols();
            for (const Matrix& w : p->layers)
                if (w.rows() != d || w.cols() != d)
                    throw DimensionError("network: plain stage layer " + shape(w) + " is not " +
                                         std::to_string(d) + "x" + std::to_string(d));
        }
    }
}

const char* to_string(ArchType t) { return t == ArchType::plain ? "plain" : "resnet"; }

ArchType arch_type_from_string(const std::string& s) {
    if (s == "plain") return ArchType::plain;
    if (s == "resnet") return ArchType::resnet;
    throw RangeError("unknown architecture type '" + s + "'");
}

Network build_network(const Architecture& arch, std::uint64_t seed) {
    if (arch.stage_widths.empty()) throw SizeError("architecture: no stages");
    if (arch.blocks_per_stage == 0) throw SizeError("architecture: zero blocks per stage");
    if (arch.input_dim == 0 || arch.output_dim == 0) throw DimensionError("architecture: zero input or output dim");
    Rng rng = Rng(seed).derive(0);
    Network net;
    net.lift = he_init(arch.stage_widths.front(), arch.input_dim, rng);
    for (std::size_t k = 0; k < arch.stage_widths.size(); ++k) {
        const std::size_t d = arch.stage_widths[k];
        if (d == 0) throw DimensionError("architecture: zero stage width");
        if (arch.type == ArchType::resnet) {
            ResNet res;
            for (std::size_t b = 0; b < arch.blocks_per_stage; ++b) {
                Matrix w1 = he_init(d, d, rng);
                Matrix w2 = he_init(d, d, rng);
                res.blocks.push_back({std::move(w1), std::move(w2)});
            }
            net.stages.emplace_back(std::move(res));
        } else {
            PlainNet plain;
            for (std::size_t b = 0; b < 2 * arch.blocks_per_stage; ++b) plain.layers.push_back(he_init(d, d, rng));
            net.stages.emplace_back(std::move(plain));
        }
        if (k + 1 < arch.stage_widths.size()) net.changers.push_back(he_init(arch.stage_widths[k + 1], d, rng));
    }
    net.head = he_init(arch.output_dim, arch.stage_widths.back(), rng);
    net.validate();
    return net;
}

std::vector<Matrix*> weights(Network& net) {
    std::vector<Matrix*> out;
    for (auto& s : steps_of(net)) {
        out.push_back(s.a);
        if (s.b) out.push_back(s.b);
    }
    return out;
}

std::vector<const Matrix*> weights(const Network& net) {
    std::vector<const Matrix*> out;
    for (const auto& s : steps_of(net)) {
        out.push_back(s.a);
        if (s.b) out.push_back(s.b);
    }
    return out;
}

Network zeros_like(const Network& net) {
    Network z = net;
    for (Matrix* w : weights(z)) *w *= 0.0;
    return z;
}

std::vector<StageSpan> stage_spans(const Network& net) {
    std::vector<StageSpan> spans;
    std::size_t index = net.lift ? 1 : 0;
    for (std::size_t k = 0; k < net.stages.size(); ++k) {
        const std::size_t n = stage_segments(net.stages[k]);
        spans.push_back({index, n});
        index += n;
        if (k < net.changers.size()) ++index;
    }
    return spans;
}

std::size_t representation_count(const Network& net) { return steps_of(net).size() + 1; }

// ---------------------------------------------------------------- forward

namespace {

template <class Step>
Matrix apply_step(const Step& s, const Matrix& h) {
    switch (s.kind) {
        case StepKind::linear:
            return matmul(*s.a, h);
        case StepKind::relu_linear:
            return relu(matmul(*s.a, h));
        case StepKind::residual: {
            Matrix out = matmul(*s.b, relu(matmul(*s.a, relu(h))));
            out += h;
            return out;
        }
    }
    return {};
}

Vector single_column(const Matrix& m) { return m.column(0); }

Matrix as_column(const Vector& x) { return Matrix::from_columns(std::span<const Vector>(&x, 1)); }

}  // namespace

Matrix forward_batch(const Network& net, const Matrix& inputs) { return forward_from(net, 0, inputs); }

Matrix forward_from(const Network& net, std::size_t index, Matrix state) {
    const auto steps = steps_of(net);
    if (index > steps.size()) throw RangeError("forward_from: representation index out of range");
    for (std::size_t l = index; l < steps.size(); ++l) state = apply_step(steps[l], state);
    return state;
}

Vector forward(const Network& net, const Vector& x) {
    if (x.dim() != net.input_dim())
        throw DimensionError("forward: input dim " + std::to_string(x.dim()) + ", network expects " +
                             std::to_string(net.input_dim()));
    return single_column(forward_batch(net, as_column(x)));
}

std::vector<Matrix> representations(const Network& net, const Matrix& inputs) {
    const auto steps = steps_of(net);
    if (inputs.rows() != net.input_dim()) throw DimensionError("representations: input dim mismatch");
    std::vector<Matrix> reps;
    reps.reserve(steps.size() + 1);
    reps.push_back(inputs);
    for (const auto& s : steps) reps.push_back(apply_step(s, reps.back()));
    return reps;
}

std::vector<std::vector<Track>> stage_tracks(const Network& net, const Matrix& inputs) {
    const auto reps = representations(net, inputs);
    std::vector<std::vector<Track>> out;
    for (const StageSpan& span : stage_spans(net)) {
        std::vector<Track> tracks;
        tracks.reserve(inputs.cols());
        for (std::size_t b = 0; b < inputs.cols(); ++b) {
            std::vector<Vector> states;
            states.reserve(span.segments + 1);
            for (std::size_t l = 0; l <= span.segments; ++l) states.push_back(reps[span.first + l].column(b));
            tracks.emplace_back(std::move(states));
        }
        out.push_back(std::move(tracks));
    }
    return out;
}

ForwardTrace forward_with_track(const Network& net, const Vector& x) {
    if (x.dim() != net.input_dim())
        throw DimensionError("forward_with_track: input dim " + std::to_string(x.dim()) + ", network expects " +
                             std::to_string(net.input_dim()));
    const Matrix col = as_column(x);
    ForwardTrace t;
    t.output = single_column(forward_batch(net, col));
    for (auto& tracks : stage_tracks(net, col)) t.tracks.push_back(std::move(tracks.front()));
    return t;
}

// ---------------------------------------------------------------- loss

const char* to_string(Loss l) { return l == Loss::cross_entropy ? "cross-entropy" : "mse"; }

Loss loss_from_string(const std::string& s) {
    if (s == "cross-entropy" || s == "softmax-cross-entropy") return Loss::cross_entropy;
    if (s == "mse" || s == "mean-squared-error") return Loss::mse;
    throw RangeError("unknown loss '" + s + "'");
}

namespace {

// Returns the mean loss and writes d(mean loss)/d(outputs) into grad.
double loss_and_gradient(const Matrix& z, const Matrix& y, Loss loss, Matrix* grad) {
    if (z.rows() != y.rows() || z.cols() != y.cols())
        throw DimensionError("loss: outputs " + shape(z) + " vs targets " + shape(y));
    const std::size_t c = z.rows();
    const std::size_t batch = z.cols();
    if (batch == 0) return 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch);
    if (grad) *grad = Matrix(c, batch);
    double total = 0.0;
    if (loss == Loss::mse) {
        for (std::size_t i = 0; i < c; ++i) {
            for (std::size_t b = 0; b < batch; ++b) {
                const double r = z(i, b) - y(i, b);
                total += r * r;
                if (grad) (*grad)(i, b) = 2.0 * r * inv_b;
            }
        }
        return total * inv_b;
    }
    std::vector<double> p(c);
    for (std::size_t b = 0; b < batch; ++b) {
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < c; ++i) zmax = std::max(zmax, z(i, b));
        double sum = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            p[i] = std::exp(z(i, b) - zmax);
            sum += p[i];
        }
        const double log_sum = std::log(sum);
        double ysum = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            total -= y(i, b) * (z(i, b) - zmax - log_sum);
            ysum += y(i, b);
        }
        if (grad)
            for (std::size_t i = 0; i < c; ++i) (*grad)(i, b) = (ysum * p[i] / sum - y(i, b)) * inv_b;
    }
    return total * inv_b;
}

void mask_by_positive(Matrix& g, const Matrix& pre) {
    auto gs = g.span();
    auto ps = pre.span();
    for (std::size_t i = 0; i < gs.size(); ++i)
        if (!(ps[i] > 0.0)) gs[i] = 0.0;
}

struct StepCache {
    Matrix input;
    Matrix pre;     // relu_linear: W H; residual: W1 relu(H)
    Matrix hidden;  // residual: relu(H)
    Matrix act;     // residual: relu(W1 relu(H))
};

}  // namespace

double batch_loss(const Matrix& outputs, const Matrix& targets, Loss loss) {
    return loss_and_gradient(outputs, targets, loss, nullptr);
}

Gradients backward(const Network& net, const Matrix& inputs, const Matrix& targets, Loss loss,
                   bool want_input_gradients) {
    if (inputs.rows() != net.input_dim())
        throw DimensionError("backward: input dim " + std::to_string(inputs.rows()) + ", network expects " +
                             std::to_string(net.input_dim()));
    if (targets.cols() != inputs.cols()) throw DimensionError("backward: targets and inputs have different batch sizes");
    if (targets.rows() != net.output_dim()) throw DimensionError("backward: target dim does not match the output");

    const auto steps = steps_of(net);
    std::vector<StepCache> cache(steps.size());
    Matrix h = inputs;
    for (std::size_t l = 0; l < steps.size(); ++l) {
        const auto& s = steps[l];
        StepCache& c = cache[l];
        c.input = h;
        switch (s.kind) {
            case StepKind::linear:
                h = matmul(*s.a, h);
                break;
            case StepKind::relu_linear:
                c.pre = matmul(*s.a, h);
                h = relu(c.pre);
                break;
            case StepKind::residual:
                c.hidden = relu(h);
                c.pre = matmul(*s.a, c.hidden);
                c.act = relu(c.pre);
                h += matmul(*s.b, c.act);
                break;
        }
    }

    Gradients g;
    g.weights = zeros_like(net);
    auto gsteps = steps_of(g.weights);
    Matrix delta;
    g.loss = loss_and_gradient(h, targets, loss, &delta);

    for (std::size_t l = steps.size(); l-- > 0;) {
        const auto& s = steps[l];
        const StepCache& c = cache[l];
        const bool need_delta_in = l > 0 || want_input_gradients;
        switch (s.kind) {
            case StepKind::linear:
                *gsteps[l].a = matmul_nt(delta, c.input);
                if (need_delta_in) delta = matmul_tn(*s.a, delta);
                break;
            case StepKind::relu_linear:
                mask_by_positive(delta, c.pre);
                *gsteps[l].a = matmul_nt(delta, c.input);
                if (need_delta_in) delta = matmul_tn(*s.a, delta);
                break;
            case StepKind::residual: {
                *gsteps[l].b = matmul_nt(delta, c.act);
                Matrix d_act = matmul_tn(*s.b, delta);
                mask_by_positive(d_act, c.pre);
                *gsteps[l].a = matmul_nt(d_act, c.hidden);
                if (need_delta_in) {
                    Matrix d_hidden = matmul_tn(*s.a, d_act);
                    mask_by_positive(d_hidden, c.input);
                    delta += d_hidden;
                }
                break;
            }
        }
    }
    if (want_input_gradients) g.inputs = std::move(delta);
    return g;
}

// ---------------------------------------------------------------- training

void sgd_step_inplace(Network& net, const Network& grads, const TrainConfig& cfg) {
    auto ws = weights(net);
    const auto gs = weights(grads);
    if (ws.size() != gs.size()) throw DimensionError("sgd_step: gradient structure does not match the network");
    const double decay = 2.0 * cfg.gamma;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        Matrix& w = *ws[i];
        const Matrix& g = *gs[i];
        if (w.rows() != g.rows() || w.cols() != g.cols())
            throw DimensionError("sgd_step: gradient " + shape(g) + " for weight " + shape(w));
        auto wv = w.span();
        auto gv = g.span();
        for (std::size_t k = 0; k < wv.size(); ++k) wv[k] -= cfg.lr * (gv[k] + decay * wv[k]);
    }
}

Network sgd_step(Network net, const Network& grads, const TrainConfig& cfg) {
    sgd_step_inplace(net, grads, cfg);
    return net;
}

double weight_decay_energy(const Network& net) {
    double e = 0.0;
    for (const Matrix* w : weights(net)) e += frobenius_norm_sq(*w);
    return e;
}

std::vector<std::size_t> predict(const Network& net, const Matrix& inputs) {
    const Matrix out = forward_batch(net, inputs);
    std::vector<std::size_t> labels(out.cols(), 0);
    for (std::size_t b = 0; b < out.cols(); ++b) {
        double best = out(0, b);
        for (std::size_t i = 1; i < out.rows(); ++i) {
            if (out(i, b) > best) {
                best = out(i, b);
                labels[b] = i;
            }
        }
    }
    return labels;
}

double accuracy(const Network& net, const Split& split) {
    if (split.size() == 0) return 0.0;
    const auto pred = predict(net, batch_inputs(split, 0, split.size()));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == split.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(split.size());
}

std::vector<StageLss> mean_stage_lss(const Network& net, const Matrix& inputs) {
    std::vector<StageLss> out;
    for (const auto& tracks : stage_tracks(net, inputs)) {
        StageLss s;
        double sum = 0.0;
        std::size_t used = 0;
        for (const Track& t : tracks) {
            try {
                const double v = lss(t);
                if (!std::isfinite(v)) {
                    ++s.skipped;
                    continue;
                }
                sum += v;
                ++used;
            } catch (const DegenerateTrackError&) {
                ++s.skipped;
            }
        }
        s.mean = used == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(used);
        out.push_back(s);
    }
    return out;
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg) {
    net.validate();
    data.validate();
    if (!(cfg.lr > 0.0)) throw RangeError("train: learning rate must be positive");
    if (cfg.gamma < 0.0) throw RangeError("train: gamma must be nonnegative");
    const std::size_t n = data.train.size();
    if (cfg.batch_size == 0 || cfg.batch_size > n) throw RangeError("train: batch size must lie in [1, train size]");
    if (data.dim() != net.input_dim()) throw DimensionError("train: dataset dim does not match the network input");

    TrainResult result{std::move(net), {}};
    Network& model = result.model;
    Rng shuffle_rng = Rng(cfg.seed).derive(1);
    const Matrix eval_inputs = batch_inputs(data.train, 0, std::min(cfg.eval_subset, n));

    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(start + count));
            std::vector<std::size_t> labels;
            labels.reserve(count);
            for (std::size_t i : idx) labels.push_back(data.train.labels[i]);
            const Matrix targets = one_hot(labels, data.n_classes);
            const Gradients g = backward(model, batch_inputs(data.train, idx), targets, cfg.loss, false);
            if (!std::isfinite(g.loss))
                throw DivergenceError("train: loss is not finite at epoch " + std::to_string(epoch));
            loss_sum += g.loss * static_cast<double>(count);
            sgd_step_inplace(model, g.weights, cfg);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / static_cast<double>(n);
        rec.weight_energy = weight_decay_energy(model);
        if (!std::isfinite(rec.weight_energy))
            throw DivergenceError("train: weights are not finite at epoch " + std::to_string(epoch));
        rec.train_acc = accuracy(model, data.train);
        rec.test_acc = accuracy(model, data.test);
        for (const StageLss& s : mean_stage_lss(model, eval_inputs)) rec.mean_lss.push_back(s.mean);
        result.log.epochs.push_back(std::move(rec));
    }
    return result;
}

// ---------------------------------------------------------------- diagnostics

Vector forward(const PlainNet& net, const Vector& x) {
    if (net.layers.empty()) throw SizeError("plain net: no layers");
    Vector h = x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        h = matvec(net.layers[l], h);
        if (l + 1 < net.layers.size()) h = relu(h);
    }
    return h;
}

Matrix activated_linear_map(const PlainNet& net, const Vector& x) {
    if (net.layers.empty()) throw SizeError("activated_linear_map: no layers");
    if (x.dim() != net.layers.front().cols()) throw DimensionError("activated_linear_map: input dim mismatch");
    Vector h = x;
    Matrix product;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const Matrix& w = net.layers[l];
        product = l == 0 ? w : matmul(w, product);
        if (l + 1 == net.layers.size()) break;
        h = matvec(w, h);
        for (std::size_t j = 0; j < h.dim(); ++j) {
            if (!(h[j] > 0.0)) {
                h[j] = 0.0;
                for (double& v : product.row(j)) v = 0.0;
            }
        }
    }
    return product;
}

VariationCheck gd_variation_check(const Matrix& w, const Matrix& x, const Matrix& g, double delta) {
    if (w.cols() != x.rows()) throw DimensionError("gd_variation_check: W and X do not compose");
    if (g.rows() != w.rows() || g.cols() != x.cols()) throw DimensionError("gd_variation_check: G has the wrong shape");
    const std::size_t rows = w.rows();
    const std::size_t m = x.cols();
    const Matrix pre = matmul(w, x);

    // X_j keeps the columns of X that activate row j.
    Matrix w_new = w;
    VariationCheck out{Matrix(rows, m), Matrix(rows, m)};
    for (std::size_t j = 0; j < rows; ++j) {
        Vector step(w.cols());  // G[j,:] X_j^T
        for (std::size_t i = 0; i < m; ++i) {
            if (!(pre(j, i) > 0.0)) continue;
            for (std::size_t k = 0; k < w.cols(); ++k) step[k] += g(j, i) * x(k, i);
        }
        for (std::size_t k = 0; k < w.cols(); ++k) w_new(j, k) -= delta * step[k];
        for (std::size_t i = 0; i < m; ++i) {
            if (!(pre(j, i) > 0.0)) continue;
            double s = 0.0;
            for (std::size_t k = 0; k < w.cols(); ++k) s += step[k] * x(k, i);
            out.predicted(j, i) = -delta * s;
        }
    }
    const Matrix pre_new = matmul(w_new, x);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            if ((pre(j, i) > 0.0) != (pre_new(j, i) > 0.0))
                throw PatternInstabilityError("gd_variation_check: unit " + std::to_string(j) + " on sample " +
                                              std::to_string(i) + " changed activation; shrink delta");
            out.observed(j, i) = std::max(pre_new(j, i), 0.0) - std::max(pre(j, i), 0.0);
        }
    }
    return out;
}

Vector ridge_solve(const Matrix& x, const Matrix& y, double gamma) {
    if (!(gamma > 0.0)) throw RangeError("ridge_solve: gamma must be positive");
    if (y.rows() != 1 || y.cols() != x.cols()) throw DimensionError("ridge_solve: Y must be 1 x m with m = X.cols");
    Matrix gram = matmul_nt(x, x);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += gamma;
    const Matrix rhs = matmul_nt(x, y);  // X Y^T, d x 1
    return solve(std::move(gram), rhs).column(0);
}

EnergyBound block_energy_bound(const ResidualBlock& block, const EmpiricalMeasure& samples) {
    const std::size_t d = block.w1.rows();
    if (block.w1.cols() != d || block.w2.rows() != d || block.w2.cols() != d)
        throw DimensionError("block_energy_bound: block is not square of one width");
    if (samples.dim() != d) throw DimensionError("block_energy_bound: sample dim does not match the block");
    double field = 0.0;
    double mass = 0.0;
    for (const Vector& x : samples.points()) {
        field += norm_sq(matvec(block.w2, relu(matvec(block.w1, relu(x)))));
        mass += norm_sq(x);
    }
    const auto m = static_cast<double>(samples.size());
    field /= m;
    mass /= m;
    const double f1 = frobenius_norm_sq(block.w1);
    const double f2 = frobenius_norm_sq(block.w2);
    return {field, f2 * f1 * mass, 0.25 * (f1 + f2) * (f1 + f2) * mass};
}

EnergyBound plain_layer_energy_bound(const Matrix& w, const EmpiricalMeasure& samples) {
    if (w.rows() != w.cols()) throw DimensionError("plain_layer_energy_bound: layer is not square");
    if (samples.dim() != w.cols()) throw DimensionError("plain_layer_energy_bound: sample dim does not match the layer");
    double lhs = 0.0;
    double mass = 0.0;
    for (const Vector& x : samples.points()) {
        for (double v : x)
            if (v < 0.0) throw RangeError("plain_layer_energy_bound: samples must be nonnegative");
        lhs += norm_sq(relu(matvec(w, x)) - x);
        mass += norm_sq(x);
    }
    const auto m = static_cast<double>(samples.size());
    return {lhs / m, (frobenius_norm_sq(w) + 1.0) * mass / m, 0.0};
}

}  // namespace gtl
