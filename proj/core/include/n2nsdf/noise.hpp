#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "n2nsdf/geometry.hpp"
#include "n2nsdf/rng.hpp"

namespace n2nsdf {

// Every law is parameterized by its standard deviation sigma so results are
// comparable across laws at equal sigma.

/// N(mu, sigma^2) per coordinate.
struct GaussianNoise {
    double sigma = 0.01;
    double mu = 0.0;
};

/// U[-sigma*sqrt(3), +sigma*sqrt(3)].
struct UniformNoise {
    double sigma = 0.01;
};

/// Equiprobable {-sigma*sqrt(1.5), 0, +sigma*sqrt(1.5)}.
struct DiscreteNoise {
    double sigma = 0.01;
};

/// Laplace with scale sigma / sqrt(2).
struct LaplaceNoise {
    double sigma = 0.01;
};

using NoiseSpec = std::variant<GaussianNoise, UniformNoise, DiscreteNoise, LaplaceNoise>;

double noise_sigma(const NoiseSpec& spec);
double noise_mean(const NoiseSpec& spec);
std::string_view noise_law_name(const NoiseSpec& spec);

/// Builds a spec from a law name ("gaussian", "uniform", "discrete", "laplace").
/// A non-zero mu is only accepted for the Gaussian law.
NoiseSpec make_noise(std::string_view law, double sigma, double mu = 0.0);

/// One per-coordinate perturbation drawn from spec.
double draw_perturbation(const NoiseSpec& spec, CounterRng& rng);

/// Perturbs x, y, z of every point independently. Normals are dropped.
/// Deterministic in (cloud, spec, seed).
PointCloud corrupt(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t seed);

/// Two independent corruptions of the same clean cloud. Member m of pair
/// pair_index uses the substream derive_seed(seed, {pair_index, m}).
std::pair<PointCloud, PointCloud> make_pair(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t seed,
                                            std::uint64_t pair_index = 0);

}  // namespace n2nsdf
