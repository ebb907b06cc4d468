#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "n2nsdf/geometry.hpp"

namespace n2nsdf {

enum class Activation { Tanh, Softplus };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

struct FieldArchitecture {
    int encoding_levels = 6;
    std::vector<int> hidden = {128, 128, 128, 128};
    Activation activation = Activation::Tanh;
    /// Initial bias of the scalar head; positive keeps the initial surface empty.
    double output_bias = 0.1;

    int input_dim() const noexcept { return 3 + 6 * encoding_levels; }
};

/// Fourier features [q, sin(2^0 pi q), cos(2^0 pi q), ..., sin(2^(L-1) pi q),
/// cos(2^(L-1) pi q)], each block holding the three axes. out.size() == 3 + 6L.
void encode(const Vec3& q, int levels, std::span<double> out);
std::vector<double> encode(const Vec3& q, int levels);

/// MLP signed-distance field over Fourier-encoded coordinates.
///
/// Parameters live in one flat vector; layer l owns a column-major weight
/// block (rows = outputs, cols = inputs) followed by its bias. Gradients and
/// optimizer moments use the same layout.
class NeuralSdf final : public ScalarField {
public:
    struct LayerShape {
        int rows;
        int cols;
        std::size_t weight_offset;
        std::size_t bias_offset;
    };

    using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
    using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    /// Hidden layers: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from init_seed. The
    /// head draws U(-0.05/fan_in, 0.05/fan_in), so with tanh the initial output
    /// stays within output_bias +- 0.05.
    NeuralSdf(FieldArchitecture arch, std::uint64_t init_seed);

    const FieldArchitecture& architecture() const noexcept { return arch_; }
    const std::vector<LayerShape>& layers() const noexcept { return layers_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }

    MatrixMap weight(std::size_t layer);
    ConstMatrixMap weight(std::size_t layer) const;
    VectorMap bias(std::size_t layer);
    ConstVectorMap bias(std::size_t layer) const;

    double eval(const Vec3& q) const override;
    void eval_batch(std::span<const Vec3> queries, std::span<double> out) const override;

    /// Zeroes the scalar head so the field is identically 0.
    void zero_output_layer();
    bool parameters_finite() const;

private:
    FieldArchitecture arch_;
    std::vector<LayerShape> layers_;
    // Aligned so Eigen takes the same vector code paths on every allocation,
    // which keeps results bit-identical across runs.
    std::vector<double, Eigen::aligned_allocator<double>> params_;
};

/// Mean squared error (1/B) sum (f(q_i) - t_i)^2 and its exact reverse-mode
/// gradient, written into grad (size parameter_count()). Throws
/// TrainingDiverged when the loss or any gradient entry is not finite.
double mse_loss_and_gradient(const NeuralSdf& field, std::span<const Vec3> queries,
                             std::span<const double> targets, std::span<double> grad);

/// Loss only, same definition as above.
double mse_loss(const NeuralSdf& field, std::span<const Vec3> queries, std::span<const double> targets);

struct AdamWConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
};

/// AdamW with decoupled weight decay over a flat parameter vector.
class AdamW {
public:
    AdamW(std::size_t parameter_count, AdamWConfig config);

    void step(std::span<double> params, std::span<const double> grad);

    std::uint64_t step_count() const noexcept { return steps_; }
    const AdamWConfig& config() const noexcept { return config_; }
    std::span<const double> first_moment() const noexcept { return m_; }
    std::span<const double> second_moment() const noexcept { return v_; }

private:
    AdamWConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t steps_ = 0;
};

}  // namespace n2nsdf
