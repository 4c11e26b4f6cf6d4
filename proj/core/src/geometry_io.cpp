#include "hedgehog/geometry.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace hedgehog {

namespace {

bool next_content_line(std::istream& in, std::string& line, int& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        return true;
    }
    return false;
}

[[noreturn]] void fail(int lineno, const std::string& what) {
    throw ParseError("geometry line " + std::to_string(lineno) + ": " + what);
}

int read_header(std::istream& in, int& lineno, const char* key) {
    std::string line;
    if (!next_content_line(in, line, lineno)) fail(lineno, std::string("missing '") + key + "'");
    std::istringstream ss(line);
    std::string word;
    long value = -1;
    if (!(ss >> word >> value) || word != key) fail(lineno, std::string("expected '") + key + " <int>'");
    return static_cast<int>(value);
}

}  // namespace

std::vector<BezierPatch> read_geometry(std::istream& in) {
    int lineno = 0;
    const int n = read_header(in, lineno, "degree");
    if (n < 1 || n > 40) fail(lineno, "degree out of range");
    const int quads = read_header(in, lineno, "quads");
    if (quads < 1) fail(lineno, "need at least one quad");
    const int n1 = n + 1;
    std::vector<std::vector<Vec3>> ctrl(quads, std::vector<Vec3>(n1 * n1));
    std::vector<std::vector<char>> seen(quads, std::vector<char>(n1 * n1, 0));
    std::string line;
    for (long k = 0; k < static_cast<long>(quads) * n1 * n1; ++k) {
        if (!next_content_line(in, line, lineno)) fail(lineno, "unexpected end of file");
        std::istringstream ss(line);
        int r, l, m;
        double x, y, z;
        if (!(ss >> r >> l >> m >> x >> y >> z)) fail(lineno, "expected 'r l m x y z'");
        if (r < 0 || r >= quads || l < 0 || l > n || m < 0 || m > n) fail(lineno, "index out of range");
        if (seen[r][l * n1 + m]) fail(lineno, "duplicate control point");
        seen[r][l * n1 + m] = 1;
        ctrl[r][l * n1 + m] = Vec3(x, y, z);
    }
    std::vector<BezierPatch> out;
    out.reserve(quads);
    for (auto& c : ctrl) out.emplace_back(n, std::move(c));
    return out;
}

std::vector<BezierPatch> read_geometry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open geometry file " + path);
    return read_geometry(in);
}

void write_geometry(std::ostream& out, const std::vector<BezierPatch>& patches) {
    if (patches.empty()) throw UsageError("no patches to write");
    const int n = patches.front().degree();
    for (const auto& p : patches)
        if (p.degree() != n) throw UsageError("geometry file requires a uniform degree");
    out << "degree " << n << "\nquads " << patches.size() << "\n";
    out << std::setprecision(17);
    for (std::size_t r = 0; r < patches.size(); ++r)
        for (int l = 0; l <= n; ++l)
            for (int m = 0; m <= n; ++m) {
                const Vec3& a = patches[r].control_point(l, m);
                out << r << ' ' << l << ' ' << m << ' ' << a.x() << ' ' << a.y() << ' ' << a.z()
                    << '\n';
            }
}

void write_geometry(std::ostream& out, const PatchSet& set) {
    std::vector<BezierPatch> shapes;
    shapes.reserve(set.size());
    for (const auto& p : set.patches()) shapes.push_back(p.shape);
    write_geometry(out, shapes);
}

}  // namespace hedgehog
