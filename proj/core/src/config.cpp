#include "n2nsdf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "n2nsdf/errors.hpp"

namespace n2nsdf {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view key, std::string_view text) {
    const std::string s(trim(text));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw ConfigError(std::string(key), "expected a number, got '" + s + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
    const std::string_view s = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    const std::string_view s = trim(text);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(std::string(key), "expected true or false, got '" + std::string(s) + "'");
}

std::vector<std::string> split_list(std::string_view key, std::string_view text) {
    std::vector<std::string> items;
    if (trim(text).empty()) throw ConfigError(std::string(key), "empty list");
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        const std::string_view item = trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (item.empty()) throw ConfigError(std::string(key), "empty list entry");
        items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return items;
}

template <class T, class F>
std::vector<T> parse_list(std::string_view key, std::string_view text, F parse_one) {
    std::vector<T> out;
    for (const auto& item : split_list(key, text)) out.push_back(parse_one(key, item));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ',';
        out += fmt(items[i]);
    }
    return out;
}

std::string identity(const std::string& s) { return s; }
std::string format_u64(std::uint64_t v) { return std::to_string(v); }

template <class T, class F>
std::string join_optional(const std::optional<std::vector<T>>& items, F fmt) {
    return items ? join(*items, fmt) : std::string("-");
}

struct KeyHandler {
    std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::size_t parse_count(std::string_view key, std::string_view value) {
    return static_cast<std::size_t>(parse_u64(key, value));
}

const std::map<std::string, KeyHandler, std::less<>>& handlers() {
    static const std::map<std::string, KeyHandler, std::less<>> table = [] {
        std::map<std::string, KeyHandler, std::less<>> t;
        auto count = [&t](const char* name, auto member) {
            t[name] = {[member](ExperimentConfig& c, std::string_view k, std::string_view v) {
                           member(c) = parse_count(k, v);
                       },
                       [member](const ExperimentConfig& c) {
                           return std::to_string(member(const_cast<ExperimentConfig&>(c)));
                       }};
        };
        auto real = [&t](const char* name, auto member) {
            t[name] = {[member](ExperimentConfig& c, std::string_view k, std::string_view v) {
                           member(c) = parse_double(k, v);
                       },
                       [member](const ExperimentConfig& c) {
                           return format_double(member(const_cast<ExperimentConfig&>(c)));
                       }};
        };

        t["shape"] = {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.train.shape = trim(v); },
                      [](const ExperimentConfig& c) { return c.train.shape; }};
        t["noise_law"] = {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.noise_law = trim(v); },
                          [](const ExperimentConfig& c) { return c.noise_law; }};
        real("sigma", [](ExperimentConfig& c) -> double& { return c.sigma; });
        real("mu", [](ExperimentConfig& c) -> double& { return c.mu; });
        count("n_points", [](ExperimentConfig& c) -> std::size_t& { return c.train.n_points; });
        count("n_uniform_queries", [](ExperimentConfig& c) -> std::size_t& { return c.train.n_uniform_queries; });
        count("epochs", [](ExperimentConfig& c) -> std::size_t& { return c.train.epochs; });
        count("pairs_per_epoch", [](ExperimentConfig& c) -> std::size_t& { return c.train.pairs_per_epoch; });
        count("batch_size", [](ExperimentConfig& c) -> std::size_t& { return c.train.batch_size; });
        count("k_neighbors", [](ExperimentConfig& c) -> std::size_t& { return c.train.k_neighbors; });
        count("metric_samples", [](ExperimentConfig& c) -> std::size_t& { return c.metric_samples; });
        count("iou_samples", [](ExperimentConfig& c) -> std::size_t& { return c.iou_samples; });
        real("learning_rate", [](ExperimentConfig& c) -> double& { return c.train.optimizer.learning_rate; });
        real("weight_decay", [](ExperimentConfig& c) -> double& { return c.train.optimizer.weight_decay; });
        real("beta1", [](ExperimentConfig& c) -> double& { return c.train.optimizer.beta1; });
        real("beta2", [](ExperimentConfig& c) -> double& { return c.train.optimizer.beta2; });
        real("epsilon", [](ExperimentConfig& c) -> double& { return c.train.optimizer.epsilon; });
        real("output_bias", [](ExperimentConfig& c) -> double& { return c.train.architecture.output_bias; });
        real("iso_value", [](ExperimentConfig& c) -> double& { return c.iso_value; });
        real("tau", [](ExperimentConfig& c) -> double& { return c.tau; });

        t["seed"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.seed = parse_u64(k, v); },
                     [](const ExperimentConfig& c) { return std::to_string(c.train.seed); }};
        t["mode"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                         try {
                             c.train.mode = parse_mode(trim(v));
                         } catch (const std::invalid_argument& e) {
                             throw ConfigError(std::string(k), e.what());
                         }
                     },
                     [](const ExperimentConfig& c) { return std::string(mode_name(c.train.mode)); }};
        t["swap_roles"] = {
            [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.train.swap_roles = parse_bool(k, v); },
            [](const ExperimentConfig& c) { return std::string(c.train.swap_roles ? "true" : "false"); }};
        t["encoding_levels"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                    c.train.architecture.encoding_levels = static_cast<int>(parse_u64(k, v));
                                },
                                [](const ExperimentConfig& c) {
                                    return std::to_string(c.train.architecture.encoding_levels);
                                }};
        t["hidden_layers"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                  auto widths = parse_list<std::size_t>(k, v, parse_count);
                                  if (std::find(widths.begin(), widths.end(), 0u) != widths.end())
                                      throw ConfigError(std::string(k), "layer widths must be >= 1");
                                  c.train.architecture.hidden.assign(widths.begin(), widths.end());
                              },
                              [](const ExperimentConfig& c) {
                                  return join(c.train.architecture.hidden, [](auto w) { return std::to_string(w); });
                              }};
        t["activation"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                               try {
                                   c.train.architecture.activation = parse_activation(trim(v));
                               } catch (const std::invalid_argument& e) {
                                   throw ConfigError(std::string(k), e.what());
                               }
                           },
                           [](const ExperimentConfig& c) {
                               return std::string(activation_name(c.train.architecture.activation));
                           }};
        t["cube_half_extent"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                     const double h = parse_double(k, v);
                                     if (!(h > 0.0)) throw ConfigError(std::string(k), "must be > 0");
                                     c.train.cube = BoundingCube(h);
                                 },
                                 [](const ExperimentConfig& c) { return format_double(c.train.cube.half_extent()); }};
        t["resolution"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                               const auto r = parse_u64(k, v);
                               if (r < 1 || r > 1024) throw ConfigError(std::string(k), "must be in [1, 1024]");
                               c.resolution = static_cast<int>(r);
                           },
                           [](const ExperimentConfig& c) { return std::to_string(c.resolution); }};
        t["output_dir"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                               if (trim(v).empty()) throw ConfigError(std::string(k), "must not be empty");
                               c.output_dir = std::string(trim(v));
                           },
                           [](const ExperimentConfig& c) { return c.output_dir.string(); }};

        t["sweep_shapes"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                 c.sweep_shapes = split_list(k, v);
                             },
                             [](const ExperimentConfig& c) { return join_optional(c.sweep_shapes, identity); }};
        t["sweep_noise_laws"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                     c.sweep_noise_laws = split_list(k, v);
                                 },
                                 [](const ExperimentConfig& c) { return join_optional(c.sweep_noise_laws, identity); }};
        t["sweep_modes"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                auto modes = split_list(k, v);
                                for (auto& m : modes) {
                                    try {
                                        m = mode_name(parse_mode(m));
                                    } catch (const std::invalid_argument& e) {
                                        throw ConfigError(std::string(k), e.what());
                                    }
                                }
                                c.sweep_modes = std::move(modes);
                            },
                            [](const ExperimentConfig& c) { return join_optional(c.sweep_modes, identity); }};
        t["sweep_sigmas"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                 c.sweep_sigmas = parse_list<double>(k, v, parse_double);
                             },
                             [](const ExperimentConfig& c) { return join_optional(c.sweep_sigmas, format_double); }};
        t["sweep_mus"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                              c.sweep_mus = parse_list<double>(k, v, parse_double);
                          },
                          [](const ExperimentConfig& c) { return join_optional(c.sweep_mus, format_double); }};
        t["sweep_seeds"] = {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
                                c.sweep_seeds = parse_list<std::uint64_t>(k, v, parse_u64);
                            },
                            [](const ExperimentConfig& c) { return join_optional(c.sweep_seeds, format_u64); }};
        return t;
    }();
    return table;
}

}  // namespace

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig cfg = train;
    try {
        cfg.noise = make_noise(noise_law, sigma, mu);
    } catch (const std::invalid_argument& e) {
        const std::string key = mu != 0.0 && noise_law != "gaussian" ? "mu" : (sigma < 0.0 ? "sigma" : "noise_law");
        throw ConfigError(key, e.what());
    }
    cfg.validate();
    return cfg;
}

GridSpec ExperimentConfig::grid() const {
    GridSpec g;
    g.resolution = resolution;
    g.cube = train.cube;
    g.iso_value = iso_value;
    return g;
}

EvaluationOptions ExperimentConfig::evaluation() const {
    EvaluationOptions o;
    o.n_samples = metric_samples;
    o.tau = tau;
    o.iou_samples = iou_samples;
    o.seed = train.seed;
    o.cube = train.cube;
    return o;
}

std::filesystem::path ExperimentConfig::output_path() const {
    if (output_dir.is_absolute()) return output_dir;
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0')
        return std::filesystem::path(root) / output_dir;
    return output_dir;
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto& table = handlers();
    const auto it = table.find(trim(key));
    if (it == table.end()) throw ConfigError(std::string(trim(key)), "unknown configuration key");
    it->second.set(config, it->first, value);
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig config;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(std::string(line), "expected 'key = value' on line " + std::to_string(line_no));
            apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : handlers()) keys.push_back(k);
    return keys;
}

std::string canonical_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& [k, h] : handlers()) {
        if (k == "output_dir") continue;
        out += k + '=' + h.get(config) + '\n';
    }
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : canonical_config(config)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace n2nsdf
