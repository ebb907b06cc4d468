#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/geometry.hpp"
#include "n2nsdf/sampling.hpp"

namespace n2nsdf {

namespace {

std::string format_point(const Vec3& p) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", p.x(), p.y(), p.z());
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

bool parse_vec3(std::istringstream& ls, Vec3& out) {
    double x, y, z;
    if (!(ls >> x >> y >> z)) return false;
    out = Vec3(x, y, z);
    return out.allFinite();
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 v;
            if (!parse_vec3(ls, v)) throw ParseError("malformed vertex", line_no);
            vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string token;
            while (ls >> token) {
                // Accept "i", "i/t", "i//n", "i/t/n"; only the position index matters.
                const std::string head = token.substr(0, token.find('/'));
                std::size_t used = 0;
                long value = 0;
                try {
                    value = std::stol(head, &used);
                } catch (const std::exception&) {
                    throw ParseError("malformed face index '" + token + "'", line_no);
                }
                if (used != head.size()) throw ParseError("malformed face index '" + token + "'", line_no);
                if (value == 0) throw ParseError("face index 0 is invalid (OBJ is 1-based)", line_no);
                const long n = static_cast<long>(vertices.size());
                const long resolved = value > 0 ? value - 1 : n + value;
                if (resolved < 0 || resolved >= n) {
                    throw ParseError("face index " + std::to_string(value) + " out of range", line_no);
                }
                idx.push_back(resolved);
            }
            if (idx.size() != 3) throw ParseError("only triangular faces are supported", line_no);
            const Face face{static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[1]),
                            static_cast<std::uint32_t>(idx[2])};
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
                throw ParseError("degenerate face repeats a vertex", line_no);
            }
            faces.push_back(face);
        }
        // vn, vt, o, g, s, usemtl, mtllib: ignored.
    }
    return TriangleMesh(std::move(vertices), std::move(faces));
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::string>& header_comments) {
    std::ofstream out = open_for_write(path);
    for (const auto& c : header_comments) out << "# " << c << '\n';
    for (const auto& v : mesh.vertices()) out << "v " << format_point(v) << '\n';
    for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_xyz(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    for (const auto& p : cloud.points) out << format_point(p) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

PointCloud load_xyz(const std::filesystem::path& path) {
    std::ifstream in = open_for_read(path);
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        Vec3 p;
        if (!parse_vec3(ls, p)) throw ParseError("malformed point", line_no);
        cloud.points.push_back(p);
    }
    return cloud;
}

}  // namespace n2nsdf
