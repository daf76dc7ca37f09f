#pragma once

#include <iosfwd>
#include <string>

#include "wgs/ansatz.hpp"

namespace wgs {

/// Flat text checkpoint:
///   WGS v1 N m
///   phases, upper triangle row-major, one per line
///   deformations column-major, "re im" per line
///   unitaries site-major (row-major within each 2x2), "re im" per line
///   weights, "re im" per line
/// Values are written with 17 significant digits so a load reproduces them
/// exactly. Symmetry profiles are not part of the record; phases load dense.
void write_ansatz(std::ostream& out, const SuperpositionAnsatz& ansatz);
SuperpositionAnsatz read_ansatz(std::istream& in);

void save_ansatz(const std::string& path, const SuperpositionAnsatz& ansatz);
SuperpositionAnsatz load_ansatz(const std::string& path);

}  // namespace wgs
