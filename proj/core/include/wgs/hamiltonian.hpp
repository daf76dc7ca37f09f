#pragma once

#include <memory>
#include <string>

#include "wgs/lattice.hpp"
#include "wgs/reduction.hpp"

namespace wgs {

/// Two-local Hamiltonian on a lattice.
struct TwoLocalHamiltonian {
    TwoLocalObservable terms;
    std::shared_ptr<const Lattice> lattice;
    std::string model;

    int n_sites() const { return lattice ? lattice->size() : 0; }
};

std::shared_ptr<const Lattice> build_lattice(int dim, std::vector<int> extents, bool periodic);

/// H = -sum_<a,b> Z_a Z_b - field sum_a X_a over the lattice's bonds.
TwoLocalHamiltonian ising(std::shared_ptr<const Lattice> lattice, double field);

/// Translation classes of the pair terms of `h` (periodic lattices only).
/// Two terms share a class when one is a lattice translate of the other; the
/// orientation flag records whether the term is stored reversed relative to
/// its class representative.
TermClasses translation_classes(const TwoLocalHamiltonian& h);

/// Number of distinct pair-term classes in `classes`.
int class_count(const TermClasses& classes);

}  // namespace wgs
