#pragma once

#include <array>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace wgs {

using Bond = std::pair<int, int>;

/// Hypercubic lattice in 1-3 dimensions with open or periodic boundaries.
///
/// Sites are numbered row-major over coordinates (first axis slowest).
/// Distances use the minimum-image convention when periodic.
class Lattice {
  public:
    static Lattice build(int dim, std::vector<int> extents, bool periodic);

    int dim() const { return dim_; }
    int size() const { return n_sites_; }
    bool periodic() const { return periodic_; }
    std::span<const int> extents() const { return extents_; }
    std::span<const int> coords(int site) const {
        return {coords_.data() + static_cast<std::size_t>(site) * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<Bond>& bonds() const { return bonds_; }

    int site_at(std::span<const int> coords) const;

    /// Per-axis absolute displacement, minimum image when periodic.
    std::array<int, 3> abs_displacement(int a, int b) const;
    /// Signed displacement b - a reduced modulo the extents (periodic), or plain
    /// difference (open).
    std::array<int, 3> displacement(int a, int b) const;
    double distance(int a, int b) const;

    /// Site reached from `site` by a lattice translation (periodic wrap).
    int translate(int site, const std::array<int, 3>& offset) const;

    /// Checkerboard parity (sum of coordinates mod 2).
    int sublattice(int site) const;

    /// Distance classes: every unordered pair (a != b) maps to a class index in
    /// [0, class_count()) determined by its Euclidean distance. Class order is
    /// by increasing distance.
    int distance_class(int a, int b) const;
    int distance_class_count() const { return static_cast<int>(class_distances_.size()); }
    double class_distance(int cls) const { return class_distances_[cls]; }

    /// Index of a per-axis absolute displacement in the flat displacement table.
    int displacement_index(const std::array<int, 3>& abs_disp) const;
    int displacement_table_size() const { return static_cast<int>(disp_class_.size()); }

  private:
    int dim_ = 1;
    int n_sites_ = 0;
    bool periodic_ = false;
    std::vector<int> extents_;
    std::vector<int> coords_;
    std::vector<Bond> bonds_;
    std::vector<int> disp_dims_;
    std::vector<int> disp_class_;  // displacement index -> class (-1 for zero)
    std::vector<double> class_distances_;
};

}  // namespace wgs
