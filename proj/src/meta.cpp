#include "phireg/meta.hpp"

#include <cmath>

namespace phireg {

std::size_t rate_grid_size(std::size_t d) {
  if (d < 2) throw std::invalid_argument("rate_grid_size: d must be at least 2");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < d) ++bits;
  return 2 * bits;
}

Vec rate_grid(std::size_t d, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("rate_grid: horizon must be positive");
  const std::size_t m = rate_grid_size(d);
  Vec etas(m);
  for (std::size_t h = 1; h <= m; ++h)
    etas[h - 1] = std::sqrt(std::ldexp(1.0, static_cast<int>(h)) / static_cast<double>(horizon));
  return etas;
}

double transform_loss(const StochasticMatrix& phi, std::span<const double> p,
                      std::span<const double> l) {
  const std::size_t d = phi.size();
  if (p.size() != d || l.size() != d) throw std::invalid_argument("transform_loss: dimension mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < d; ++i) {
    if (p[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += phi(i, j) * l[j];
    s += p[i] * row;
  }
  return s.value();
}

KernelMeta make_kernel_meta(std::size_t d, std::size_t horizon, std::optional<double> meta_eta) {
  Vec etas = rate_grid(d, horizon);
  std::vector<KernelMwu> bases;
  bases.reserve(etas.size());
  for (double eta : etas) bases.emplace_back(d, eta);
  const double rate =
      meta_eta.value_or(std::sqrt(std::log(static_cast<double>(etas.size())) / static_cast<double>(horizon)));
  return KernelMeta(std::move(bases), std::move(etas), rate, horizon);
}

BmMeta make_bm_meta(std::size_t d, std::size_t horizon, std::optional<double> meta_eta) {
  const Vec etas = rate_grid(d, horizon);
  const PriorFamily family(d);
  std::vector<BmReduction> bases;
  Vec base_etas;
  bases.reserve(family.count() * etas.size());
  for (std::size_t k = 0; k < family.count(); ++k)
    for (double eta : etas) {
      bases.emplace_back(family.psi(k), eta, SubKind::plain);
      base_etas.push_back(eta);
    }
  const double arms = static_cast<double>(bases.size());
  const double rate = meta_eta.value_or(std::sqrt(std::log(arms) / static_cast<double>(horizon)));
  return BmMeta(std::move(bases), std::move(base_etas), rate, horizon);
}

}  // namespace phireg
