#include "n2nsdf/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/rng.hpp"

namespace n2nsdf {

std::string_view activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "softplus"; }

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "softplus") return Activation::Softplus;
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void encode(const Vec3& q, int levels, std::span<double> out) {
    if (levels < 0) throw std::invalid_argument("encode: levels must be >= 0");
    if (out.size() != static_cast<std::size_t>(3 + 6 * levels)) throw std::invalid_argument("encode: bad output size");
    out[0] = q.x();
    out[1] = q.y();
    out[2] = q.z();
    double freq = std::numbers::pi;
    for (int l = 0; l < levels; ++l) {
        const std::size_t base = 3 + 6 * static_cast<std::size_t>(l);
        for (int axis = 0; axis < 3; ++axis) {
            out[base + axis] = std::sin(freq * q[axis]);
            out[base + 3 + axis] = std::cos(freq * q[axis]);
        }
        freq *= 2.0;
    }
}

std::vector<double> encode(const Vec3& q, int levels) {
    std::vector<double> out(3 + 6 * static_cast<std::size_t>(std::max(levels, 0)));
    encode(q, levels, out);
    return out;
}

// ---------------------------------------------------------------------------

NeuralSdf::NeuralSdf(FieldArchitecture arch, std::uint64_t init_seed) : arch_(std::move(arch)) {
    if (arch_.encoding_levels < 0) throw std::invalid_argument("encoding_levels must be >= 0");
    std::vector<int> sizes{arch_.input_dim()};
    for (int w : arch_.hidden) {
        if (w < 1) throw std::invalid_argument("hidden layer width must be >= 1");
        sizes.push_back(w);
    }
    sizes.push_back(1);

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        LayerShape s{sizes[l + 1], sizes[l], offset, 0};
        offset += static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
        s.bias_offset = offset;
        offset += static_cast<std::size_t>(s.rows);
        layers_.push_back(s);
    }
    params_.assign(offset, 0.0);

    CounterRng rng(derive_seed(init_seed, {0x1417}));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const bool head = l + 1 == layers_.size();
        const double fan_in = static_cast<double>(layers_[l].cols);
        const double bound = head ? 0.05 / fan_in : 1.0 / std::sqrt(fan_in);
        auto w = weight(l);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-bound, bound);
        }
        auto b = bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-bound, bound);
    }
    bias(layers_.size() - 1).setConstant(arch_.output_bias);
}

NeuralSdf::MatrixMap NeuralSdf::weight(std::size_t layer) {
    const auto& s = layers_.at(layer);
    return MatrixMap(params_.data() + s.weight_offset, s.rows, s.cols);
}

NeuralSdf::ConstMatrixMap NeuralSdf::weight(std::size_t layer) const {
    const auto& s = layers_.at(layer);
    return ConstMatrixMap(params_.data() + s.weight_offset, s.rows, s.cols);
}

NeuralSdf::VectorMap NeuralSdf::bias(std::size_t layer) {
    const auto& s = layers_.at(layer);
    return VectorMap(params_.data() + s.bias_offset, s.rows);
}

NeuralSdf::ConstVectorMap NeuralSdf::bias(std::size_t layer) const {
    const auto& s = layers_.at(layer);
    return ConstVectorMap(params_.data() + s.bias_offset, s.rows);
}

void NeuralSdf::zero_output_layer() {
    weight(layers_.size() - 1).setZero();
    bias(layers_.size() - 1).setZero();
}

bool NeuralSdf::parameters_finite() const {
    return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

constexpr std::size_t kChunk = 512;
// Batches are padded with zero columns to a multiple of this, so a query's
// output does not depend on how many other queries share its batch.
constexpr std::size_t kColumnPad = 8;

Eigen::Index padded_columns(std::size_t n) {
    return static_cast<Eigen::Index>((n + kColumnPad - 1) / kColumnPad * kColumnPad);
}

void encode_batch(std::span<const Vec3> queries, int levels, Eigen::MatrixXd& x) {
    const int dim = 3 + 6 * levels;
    x.setZero(dim, padded_columns(queries.size()));
    for (std::size_t i = 0; i < queries.size(); ++i) {
        encode(queries[i], levels, std::span<double>(x.col(static_cast<Eigen::Index>(i)).data(), dim));
    }
}

void activate(Activation act, Eigen::MatrixXd& z) {
    if (act == Activation::Tanh) {
        z = z.array().tanh();
    } else {
        // Stable softplus: max(z, 0) + log1p(exp(-|z|)).
        z = z.array().max(0.0) + (-z.array().abs()).exp().log1p();
    }
}

// Forward pass storing activations for backprop. acts[0] is the encoded
// input, acts[l+1] the output of layer l (post-activation for hidden layers).
// For softplus, pre[l] keeps the hidden pre-activations.
struct Tape {
    std::vector<Eigen::MatrixXd> acts;
    std::vector<Eigen::MatrixXd> pre;
};

void forward(const NeuralSdf& field, std::span<const Vec3> queries, Tape& tape, bool keep_pre) {
    const auto& layers = field.layers();
    const Activation act = field.architecture().activation;
    tape.acts.resize(layers.size() + 1);
    if (keep_pre) tape.pre.resize(layers.size());
    encode_batch(queries, field.architecture().encoding_levels, tape.acts[0]);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd& z = tape.acts[l + 1];
        z.noalias() = field.weight(l) * tape.acts[l];
        z.colwise() += field.bias(l);
        if (l + 1 < layers.size()) {
            if (keep_pre) tape.pre[l] = z;
            activate(act, z);
        }
    }
}

}  // namespace

void NeuralSdf::eval_batch(std::span<const Vec3> queries, std::span<double> out) const {
    if (out.size() != queries.size()) throw std::invalid_argument("eval_batch: size mismatch");
    Tape tape;
    for (std::size_t start = 0; start < queries.size(); start += kChunk) {
        const std::size_t count = std::min(kChunk, queries.size() - start);
        forward(*this, queries.subspan(start, count), tape, false);
        const Eigen::MatrixXd& y = tape.acts.back();
        for (std::size_t i = 0; i < count; ++i) out[start + i] = y(0, static_cast<Eigen::Index>(i));
    }
}

double NeuralSdf::eval(const Vec3& q) const {
    double out = 0.0;
    eval_batch(std::span<const Vec3>(&q, 1), std::span<double>(&out, 1));
    return out;
}

double mse_loss(const NeuralSdf& field, std::span<const Vec3> queries, std::span<const double> targets) {
    if (queries.empty() || queries.size() != targets.size()) throw std::invalid_argument("mse_loss: bad batch");
    std::vector<double> pred(queries.size());
    field.eval_batch(queries, pred);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - targets[i]) * (pred[i] - targets[i]);
    return sum / static_cast<double>(pred.size());
}

double mse_loss_and_gradient(const NeuralSdf& field, std::span<const Vec3> queries, std::span<const double> targets,
                             std::span<double> grad) {
    if (queries.empty() || queries.size() != targets.size()) {
        throw std::invalid_argument("mse_loss_and_gradient: bad batch");
    }
    if (grad.size() != field.parameter_count()) throw std::invalid_argument("mse_loss_and_gradient: bad gradient size");

    const auto& layers = field.layers();
    const Activation act = field.architecture().activation;
    const bool softplus = act == Activation::Softplus;
    Tape tape;
    forward(field, queries, tape, softplus);

    const auto batch = static_cast<Eigen::Index>(queries.size());
    const double inv_b = 1.0 / static_cast<double>(batch);
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(1, padded_columns(queries.size()));
    double loss = 0.0;
    for (Eigen::Index i = 0; i < batch; ++i) {
        const double r = tape.acts.back()(0, i) - targets[static_cast<std::size_t>(i)];
        loss += r * r;
        delta(0, i) = 2.0 * r * inv_b;
    }
    loss *= inv_b;

    Eigen::MatrixXd upstream, gw;
    Eigen::VectorXd gb;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto& s = layers[l];
        // Owned temporaries rather than maps into grad: the caller's buffer
        // alignment must not change the arithmetic.
        gw.noalias() = delta * tape.acts[l].transpose();
        gb = delta.rowwise().sum();
        std::copy(gw.data(), gw.data() + gw.size(), grad.begin() + static_cast<std::ptrdiff_t>(s.weight_offset));
        std::copy(gb.data(), gb.data() + gb.size(), grad.begin() + static_cast<std::ptrdiff_t>(s.bias_offset));
        if (l == 0) break;
        upstream.noalias() = field.weight(l).transpose() * delta;
        // Derivative of the activation that produced acts[l].
        if (softplus) {
            const auto sig = (1.0 + (-tape.pre[l - 1].array()).exp()).inverse();
            delta = upstream.array() * sig;
        } else {
            delta = upstream.array() * (1.0 - tape.acts[l].array().square());
        }
    }

    if (!std::isfinite(loss) ||
        !std::all_of(grad.begin(), grad.end(), [](double v) { return std::isfinite(v); })) {
        throw TrainingDiverged("non-finite loss or gradient", 0);
    }
    return loss;
}

// ---------------------------------------------------------------------------

AdamW::AdamW(std::size_t parameter_count, AdamWConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
    if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("AdamW: learning rate must be > 0");
}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("AdamW: shape mismatch");
    ++steps_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double lr = config_.learning_rate;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    const double decay = 1.0 - lr * config_.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
        const double m_hat = m_[i] / c1;
        const double v_hat = v_[i] / c2;
        params[i] = params[i] * decay - lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
}

}  // namespace n2nsdf
