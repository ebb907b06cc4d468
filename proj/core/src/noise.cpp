#include "n2nsdf/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "n2nsdf/errors.hpp"

namespace n2nsdf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const double kSqrt3 = std::sqrt(3.0);
const double kSqrt1_5 = std::sqrt(1.5);
const double kSqrt2 = std::sqrt(2.0);

}  // namespace

double noise_sigma(const NoiseSpec& spec) {
    return std::visit([](const auto& s) { return s.sigma; }, spec);
}

double noise_mean(const NoiseSpec& spec) {
    if (const auto* g = std::get_if<GaussianNoise>(&spec)) return g->mu;
    return 0.0;
}

std::string_view noise_law_name(const NoiseSpec& spec) {
    return std::visit(Overloaded{
                          [](const GaussianNoise&) { return std::string_view("gaussian"); },
                          [](const UniformNoise&) { return std::string_view("uniform"); },
                          [](const DiscreteNoise&) { return std::string_view("discrete"); },
                          [](const LaplaceNoise&) { return std::string_view("laplace"); },
                      },
                      spec);
}

NoiseSpec make_noise(std::string_view law, double sigma, double mu) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("noise sigma must be >= 0");
    if (!std::isfinite(mu)) throw std::invalid_argument("noise mu must be finite");
    if (law == "gaussian") return GaussianNoise{sigma, mu};
    if (mu != 0.0) throw std::invalid_argument("a mean offset is only defined for gaussian noise");
    if (law == "uniform") return UniformNoise{sigma};
    if (law == "discrete") return DiscreteNoise{sigma};
    if (law == "laplace") return LaplaceNoise{sigma};
    throw std::invalid_argument("unknown noise law '" + std::string(law) + "'");
}

double draw_perturbation(const NoiseSpec& spec, CounterRng& rng) {
    return std::visit(Overloaded{
                          [&](const GaussianNoise& g) { return g.mu + g.sigma * rng.normal(); },
                          [&](const UniformNoise& u) { return u.sigma * kSqrt3 * (2.0 * rng.uniform01() - 1.0); },
                          [&](const DiscreteNoise& d) {
                              const auto bucket = static_cast<double>(rng.below(3)) - 1.0;
                              return bucket * d.sigma * kSqrt1_5;
                          },
                          [&](const LaplaceNoise& l) {
                              // Inverse CDF; u in (-1/2, 1/2) keeps the log finite.
                              const double u = rng.uniform01() - 0.5;
                              const double b = l.sigma / kSqrt2;
                              const double mag = -b * std::log(1.0 - 2.0 * std::abs(u));
                              return u < 0.0 ? -mag : mag;
                          },
                      },
                      spec);
}

PointCloud corrupt(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t seed) {
    CounterRng rng(seed);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        Vec3 q = p;
        for (int axis = 0; axis < 3; ++axis) q[axis] += draw_perturbation(spec, rng);
        out.points.push_back(q);
    }
    return out;
}

std::pair<PointCloud, PointCloud> make_pair(const PointCloud& cloud, const NoiseSpec& spec, std::uint64_t seed,
                                            std::uint64_t pair_index) {
    return {corrupt(cloud, spec, derive_seed(seed, {pair_index, 0})),
            corrupt(cloud, spec, derive_seed(seed, {pair_index, 1}))};
}

}  // namespace n2nsdf
