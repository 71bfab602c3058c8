#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace natgrad {

enum class DomainKind { interval, ball };

/// 1D interval (0, L) with Dirichlet data at both ends, or the radial
/// reduction of the ball B_R in R^N with the symmetry condition at r = 0.
///
/// Flux weights live at cell midpoints (r^(N-1) for the ball, 1 for the
/// interval); nodal weights are exact dual-cell volumes of r^(N-1) dr. The
/// surface measure |S^(N-1)| is dropped: it rescales the energy only.
class Mesh {
public:
  static Mesh interval(double length, std::size_t nodes, double p);
  static Mesh ball(double radius, int dim, std::size_t nodes, double p);

  DomainKind kind() const { return kind_; }
  double extent() const { return extent_; }
  int dim() const { return dim_; }
  double p() const { return p_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  double spacing(std::size_t cell) const { return nodes_[cell + 1] - nodes_[cell]; }
  /// r^(N-1) at the midpoint of cell [i, i+1].
  double flux_weight(std::size_t cell) const { return flux_weight_[cell]; }
  /// Measure of the dual cell of node i.
  double volume(std::size_t i) const { return volume_[i]; }
  bool is_dirichlet(std::size_t i) const {
    return i + 1 == nodes_.size() || (kind_ == DomainKind::interval && i == 0);
  }
  /// Index range [first_free, last_free] of unknown nodes.
  std::size_t first_free() const { return kind_ == DomainKind::interval ? 1 : 0; }
  std::size_t last_free() const { return nodes_.size() - 2; }
  std::string describe() const;

  /// Same geometry with a different exponent p.
  Mesh with_p(double p) const;

private:
  Mesh(DomainKind kind, double extent, int dim, std::size_t nodes, double p);

  DomainKind kind_;
  double extent_;
  int dim_;
  double p_;
  std::vector<double> nodes_;
  std::vector<double> flux_weight_;
  std::vector<double> volume_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal values on a mesh.
struct Field {
  MeshPtr mesh;
  std::vector<double> values;

  Field() = default;
  Field(MeshPtr m, std::vector<double> v);
  static Field zeros(MeshPtr m);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double sup_norm() const;
  /// Values at the Dirichlet nodes are exactly zero.
  bool satisfies_dirichlet() const;
};

}  // namespace natgrad
