#include "n2nsdf/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "n2nsdf/errors.hpp"

namespace n2nsdf {

namespace {

constexpr const char* kMagic = "n2nsdf-checkpoint 1";

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::istringstream next(const char* what) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of checkpoint, expected ") + what, line_ + 1);
        ++line_;
        return std::istringstream(line);
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

double parse_hex(const std::string& token, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw ParseError("malformed number '" + token + "'", line);
    return v;
}

}  // namespace

void save_checkpoint(const NeuralSdf& field, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    const auto& arch = field.architecture();
    out << kMagic << '\n';
    for (const auto& [k, v] : meta) out << "meta " << k << ' ' << v << '\n';
    out << "encoding_levels " << arch.encoding_levels << '\n';
    out << "activation " << activation_name(arch.activation) << '\n';
    out << "output_bias " << hex(arch.output_bias) << '\n';
    out << "layers " << field.layers().size() << '\n';
    for (std::size_t l = 0; l < field.layers().size(); ++l) {
        const auto w = field.weight(l);
        const auto b = field.bias(l);
        out << "layer " << w.rows() << ' ' << w.cols() << '\n';
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << hex(w(i, j));
            out << '\n';
        }
        for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << hex(b(i));
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

bool is_checkpoint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string first;
    return in && std::getline(in, first) && first == kMagic;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    LineReader reader(in);
    {
        auto ls = reader.next("magic");
        if (ls.str() != kMagic) throw ParseError("not an n2nsdf checkpoint", reader.line());
    }

    std::map<std::string, std::string> meta;
    FieldArchitecture arch;
    arch.hidden.clear();
    std::size_t n_layers = 0;
    for (;;) {
        auto ls = reader.next("header");
        std::string key;
        ls >> key;
        if (key == "meta") {
            std::string k, v;
            ls >> k;
            std::getline(ls >> std::ws, v);
            meta[k] = v;
        } else if (key == "encoding_levels") {
            if (!(ls >> arch.encoding_levels)) throw ParseError("bad encoding_levels", reader.line());
        } else if (key == "activation") {
            std::string name;
            ls >> name;
            try {
                arch.activation = parse_activation(name);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), reader.line());
            }
        } else if (key == "output_bias") {
            std::string tok;
            ls >> tok;
            arch.output_bias = parse_hex(tok, reader.line());
        } else if (key == "layers") {
            if (!(ls >> n_layers) || n_layers == 0) throw ParseError("bad layer count", reader.line());
            break;
        } else {
            throw ParseError("unknown checkpoint header '" + key + "'", reader.line());
        }
    }

    struct Block {
        int rows, cols;
        std::vector<double> weight;  // row-major
        std::vector<double> bias;
    };
    std::vector<Block> blocks;
    for (std::size_t l = 0; l < n_layers; ++l) {
        Block blk{};
        {
            auto ls = reader.next("layer shape");
            std::string tag;
            if (!(ls >> tag >> blk.rows >> blk.cols) || tag != "layer" || blk.rows < 1 || blk.cols < 1) {
                throw ParseError("bad layer header", reader.line());
            }
        }
        auto read_row = [&](int count, std::vector<double>& dst) {
            auto ls = reader.next("values");
            std::string tok;
            int got = 0;
            while (ls >> tok) {
                dst.push_back(parse_hex(tok, reader.line()));
                ++got;
            }
            if (got != count) throw ParseError("expected " + std::to_string(count) + " values", reader.line());
        };
        for (int i = 0; i < blk.rows; ++i) read_row(blk.cols, blk.weight);
        read_row(blk.rows, blk.bias);
        blocks.push_back(std::move(blk));
    }

    for (std::size_t l = 0; l + 1 < blocks.size(); ++l) arch.hidden.push_back(blocks[l].rows);
    if (blocks.front().cols != arch.input_dim() || blocks.back().rows != 1) {
        throw ParseError("layer shapes do not match the encoding", reader.line());
    }
    for (std::size_t l = 1; l < blocks.size(); ++l) {
        if (blocks[l].cols != blocks[l - 1].rows) throw ParseError("layer shapes do not chain", reader.line());
    }

    NeuralSdf field(arch, 0);
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        auto w = field.weight(l);
        for (int i = 0; i < blocks[l].rows; ++i) {
            for (int j = 0; j < blocks[l].cols; ++j) w(i, j) = blocks[l].weight[static_cast<std::size_t>(i * blocks[l].cols + j)];
        }
        auto b = field.bias(l);
        for (int i = 0; i < blocks[l].rows; ++i) b(i) = blocks[l].bias[static_cast<std::size_t>(i)];
    }
    return {std::move(field), std::move(meta)};
}

}  // namespace n2nsdf
