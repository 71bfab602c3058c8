#include "natgrad/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "natgrad/errors.hpp"

namespace natgrad {

Mesh::Mesh(DomainKind kind, double extent, int dim, std::size_t nodes, double p)
    : kind_(kind), extent_(extent), dim_(dim), p_(p) {
  if (nodes < 3) throw ParameterError("mesh needs at least 3 nodes");
  if (!(extent > 0.0)) throw ParameterError("mesh extent must be positive");
  if (!(p > 1.0)) throw ParameterError("p must exceed 1");
  if (dim < 1) throw ParameterError("dimension N must be >= 1");
  nodes_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    nodes_[i] = extent * static_cast<double>(i) / static_cast<double>(nodes - 1);
  }
  nodes_.back() = extent;

  const int radial_power = kind == DomainKind::ball ? dim - 1 : 0;
  flux_weight_.resize(nodes - 1);
  for (std::size_t c = 0; c + 1 < nodes; ++c) {
    const double mid = 0.5 * (nodes_[c] + nodes_[c + 1]);
    flux_weight_[c] = std::pow(mid, radial_power);
  }
  volume_.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double lo = i == 0 ? nodes_[0] : 0.5 * (nodes_[i - 1] + nodes_[i]);
    const double hi = i + 1 == nodes ? nodes_[i] : 0.5 * (nodes_[i] + nodes_[i + 1]);
    if (kind == DomainKind::ball) {
      const double n = static_cast<double>(dim);
      volume_[i] = (std::pow(hi, n) - std::pow(lo, n)) / n;
    } else {
      volume_[i] = hi - lo;
    }
  }
}

Mesh Mesh::interval(double length, std::size_t nodes, double p) {
  return Mesh(DomainKind::interval, length, 1, nodes, p);
}

Mesh Mesh::ball(double radius, int dim, std::size_t nodes, double p) {
  return Mesh(DomainKind::ball, radius, dim, nodes, p);
}

Mesh Mesh::with_p(double p) const { return Mesh(kind_, extent_, dim_, nodes_.size(), p); }

std::string Mesh::describe() const {
  std::ostringstream os;
  if (kind_ == DomainKind::interval) {
    os << "interval(0," << extent_ << ")";
  } else {
    os << "ball(R=" << extent_ << ",N=" << dim_ << ")";
  }
  os << " nodes=" << nodes_.size() << " p=" << p_;
  return os.str();
}

Field::Field(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
  if (!mesh) throw ParameterError("field without mesh");
  if (values.size() != mesh->size()) throw ParameterError("field size does not match mesh");
}

Field Field::zeros(MeshPtr m) {
  const std::size_t n = m->size();
  return Field(std::move(m), std::vector<double>(n, 0.0));
}

double Field::sup_norm() const {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

bool Field::satisfies_dirichlet() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mesh->is_dirichlet(i) && values[i] != 0.0) return false;
  }
  return true;
}

}  // namespace natgrad
