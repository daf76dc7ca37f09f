#include "wgs/serialization.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wgs/errors.hpp"

namespace wgs {
namespace {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void put(std::ostream& out, cplx v) { out << fmt_real(v.real()) << ' ' << fmt_real(v.imag()) << '\n'; }

double get_real(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("checkpoint truncated");
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) throw ArgumentError("checkpoint: expected a real, got '" + line + "'");
    return v;
}

cplx get_cplx(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("checkpoint truncated");
    std::istringstream ss(line);
    double re, im;
    if (!(ss >> re >> im)) throw ArgumentError("checkpoint: expected 're im', got '" + line + "'");
    return {re, im};
}

}  // namespace

void write_ansatz(std::ostream& out, const SuperpositionAnsatz& ansatz) {
    const int n = ansatz.n_sites();
    const int m = ansatz.n_branches();
    out << "WGS v1 " << n << ' ' << m << '\n';
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) out << fmt_real(ansatz.graph()(a, b)) << '\n';
    for (int j = 0; j < m; ++j)
        for (int a = 0; a < n; ++a) put(out, ansatz.deformations()(a, j));
    for (int a = 0; a < n; ++a) {
        const Mat2& u = ansatz.unitaries()[a];
        put(out, u(0, 0));
        put(out, u(0, 1));
        put(out, u(1, 0));
        put(out, u(1, 1));
    }
    for (int j = 0; j < m; ++j) put(out, ansatz.weights()[j]);
}

SuperpositionAnsatz read_ansatz(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ArgumentError("empty checkpoint");
    std::istringstream head(line);
    std::string magic, version;
    int n = 0, m = 0;
    if (!(head >> magic >> version >> n >> m) || magic != "WGS" || version != "v1" || n < 1 || m < 1)
        throw ArgumentError("bad checkpoint header '" + line + "'");

    RMatrix phases = RMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) phases(a, b) = phases(b, a) = get_real(in);
    CMatrix d(n, m);
    for (int j = 0; j < m; ++j)
        for (int a = 0; a < n; ++a) d(a, j) = get_cplx(in);
    std::vector<Mat2> us(n);
    for (int a = 0; a < n; ++a) {
        us[a](0, 0) = get_cplx(in);
        us[a](0, 1) = get_cplx(in);
        us[a](1, 0) = get_cplx(in);
        us[a](1, 1) = get_cplx(in);
    }
    CVector alpha(m);
    for (int j = 0; j < m; ++j) alpha[j] = get_cplx(in);
    return SuperpositionAnsatz(WeightedGraph::from_matrix(phases), DeformationMatrix(std::move(d)),
                               LocalUnitaries(std::move(us)), std::move(alpha));
}

void save_ansatz(const std::string& path, const SuperpositionAnsatz& ansatz) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw ArgumentError("cannot write " + tmp);
        write_ansatz(out, ansatz);
        if (!out) throw ArgumentError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

SuperpositionAnsatz load_ansatz(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read " + path);
    return read_ansatz(in);
}

}  // namespace wgs
