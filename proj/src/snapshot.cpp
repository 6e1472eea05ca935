#include "segrelab/error.hpp"
#include "segrelab/mesh.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace segrelab {

namespace {
std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}
} // namespace

void write_snapshot(std::ostream& os, const Field& f, double t) {
    const Grid& g = f.grid;
    os << "segrelab-field v1 dim=" << g.dim() << " n=" << g.count(0);
    if (g.dim() == 2) os << "," << g.count(1);
    os << " L=" << format_double(g.length(0));
    if (g.dim() == 2) os << "," << format_double(g.length(1));
    os << " t=" << format_double(t) << "\n";
    for (double v : f.values) os << format_double(v) << "\n";
}

void write_snapshot(const std::string& path, const Field& f, double t) {
    std::ofstream os(path);
    if (!os) throw Error("cannot write snapshot: " + path);
    write_snapshot(os, f, t);
    if (!os) throw Error("error writing snapshot: " + path);
}

Field read_snapshot(std::istream& is, double* t) {
    std::string header;
    if (!std::getline(is, header)) throw Error("snapshot: missing header");
    std::istringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "segrelab-field" || version != "v1") throw Error("snapshot: bad header");
    int dim = 0;
    std::vector<double> n, L;
    double time = 0;
    std::string tok;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error("snapshot: bad header token " + tok);
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "dim") dim = std::stoi(val);
        else if (key == "n") n = parse_list(val);
        else if (key == "L") L = parse_list(val);
        else if (key == "t") time = std::stod(val);
        else throw Error("snapshot: unknown header key " + key);
    }
    if (n.size() != static_cast<std::size_t>(dim) || L.size() != n.size()) throw Error("snapshot: inconsistent header");
    Grid g = dim == 1 ? Grid::line(L[0], static_cast<int>(n[0]))
                      : Grid::rect(L[0], L[1], static_cast<int>(n[0]), static_cast<int>(n[1]));
    Field f(g);
    std::string line;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!std::getline(is, line)) throw Error("snapshot: truncated value list");
        f[k] = std::stod(line);
    }
    if (t) *t = time;
    return f;
}

Field read_snapshot(const std::string& path, double* t) {
    std::ifstream is(path);
    if (!is) throw Error("cannot read snapshot: " + path);
    return read_snapshot(is, t);
}

} // namespace segrelab
