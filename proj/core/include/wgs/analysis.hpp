#pragma once

#include <span>
#include <utility>
#include <vector>

#include "wgs/ansatz.hpp"
#include "wgs/lattice.hpp"
#include "wgs/reduction.hpp"

namespace wgs {

/// Connected two-point correlators Q[al][be] = <s_al s_be> - <s_al><s_be>
/// over the Pauli operators (x, y, z).
struct CorrelationRecord {
    int a = 0;
    int b = 0;
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    double q_max = 0.0;  ///< largest |Q| entry
};

CorrelationRecord correlations(const SuperpositionAnsatz& ansatz, int a, int b);

/// Von Neumann entropy in bits of a density matrix. Eigenvalues in
/// (-1e-10, 0) are treated as zero; anything more negative is an error.
double von_neumann_bits(const CMatrix& rho);

double block_entropy(const SuperpositionAnsatz& ansatz, std::span<const int> block,
                     int max_block = kDefaultBlockCap);

/// Sites of the axis-aligned cube of side `side` anchored at the origin.
std::vector<int> cube_block(const Lattice& lattice, int side);

struct AreaLawFit {
    double coefficient = 0.0;
    double residual = 0.0;  ///< sum of squared residuals
};

/// Least-squares fit S = coefficient * L^(dim-1) through the origin. Needs at
/// least three (L, S) points with L >= 1.
AreaLawFit area_law_fit(std::span<const std::pair<int, double>> entropies, int dim);

}  // namespace wgs
