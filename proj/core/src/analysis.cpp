#include "wgs/analysis.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "wgs/errors.hpp"

namespace wgs {

CorrelationRecord correlations(const SuperpositionAnsatz& ansatz, int a, int b) {
    if (a == b) throw ArgumentError("correlations need two distinct sites");
    const int sites[2] = {a, b};
    const ReducedDensity rd = reduced_density(ansatz, sites);
    const Mat4 rho = rd.matrix;
    const Mat2 ra = partial_trace_pair(rho, 0);
    const Mat2 rb = partial_trace_pair(rho, 1);
    const Mat2 paulis[3] = {pauli::x(), pauli::y(), pauli::z()};

    CorrelationRecord rec;
    rec.a = a;
    rec.b = b;
    for (int i = 0; i < 3; ++i) {
        const cplx ea = (ra * paulis[i]).trace();
        for (int j = 0; j < 3; ++j) {
            const cplx eb = (rb * paulis[j]).trace();
            const Mat4 op = kron(paulis[i], paulis[j]);
            const cplx v = (rho * op).trace() - ea * eb;
            if (std::abs(v.imag()) > 1e-9) throw NumericRangeError("correlator has imaginary residue");
            rec.q(i, j) = v.real();
            rec.q_max = std::max(rec.q_max, std::abs(v.real()));
        }
    }
    return rec;
}

double von_neumann_bits(const CMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericRangeError("eigensolver failed on a reduced density");
    double s = 0.0;
    for (double lam : es.eigenvalues()) {
        if (lam < -1e-10) throw NumericRangeError("reduced density has eigenvalue " + std::to_string(lam));
        lam = std::min(lam, 1.0);
        if (lam > 0.0) s -= lam * std::log2(lam);
    }
    return s;
}

double block_entropy(const SuperpositionAnsatz& ansatz, std::span<const int> block, int max_block) {
    if (block.empty()) return 0.0;
    return von_neumann_bits(reduced_density(ansatz, block, max_block).matrix);
}

std::vector<int> cube_block(const Lattice& lattice, int side) {
    const int dim = lattice.dim();
    if (side < 1) throw ArgumentError("block side must be positive");
    for (int e : lattice.extents())
        if (side > e) throw ArgumentError("block side exceeds the lattice extent");
    std::vector<int> out;
    std::vector<int> c(dim, 0);
    int total = 1;
    for (int i = 0; i < dim; ++i) total *= side;
    for (int idx = 0; idx < total; ++idx) {
        int r = idx;
        for (int i = dim - 1; i >= 0; --i) {
            c[i] = r % side;
            r /= side;
        }
        out.push_back(lattice.site_at(c));
    }
    return out;
}

AreaLawFit area_law_fit(std::span<const std::pair<int, double>> entropies, int dim) {
    if (entropies.size() < 3) throw ArgumentError("area-law fit needs at least three points");
    if (dim < 1 || dim > 3) throw ArgumentError("dimension must be 1, 2 or 3");
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [l, s] : entropies) {
        if (l < 1) throw ArgumentError("block sizes must be >= 1");
        const double x = std::pow(static_cast<double>(l), dim - 1);
        sxx += x * x;
        sxy += x * s;
    }
    if (!(sxx > 0.0)) throw ArgumentError("degenerate abscissae");
    AreaLawFit fit;
    fit.coefficient = sxy / sxx;
    for (const auto& [l, s] : entropies) {
        const double r = s - fit.coefficient * std::pow(static_cast<double>(l), dim - 1);
        fit.residual += r * r;
    }
    return fit;
}

}  // namespace wgs
