#include "phireg/bm.hpp"

#include <stdexcept>

namespace phireg {

namespace {

template <class Sub>
std::vector<Sub> make_subs(const StochasticMatrix& psi, double eta) {
  std::vector<Sub> subs;
  subs.reserve(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    auto r = psi.row(i);
    subs.emplace_back(ProbVector(Vec(r.begin(), r.end())), eta);
  }
  return subs;
}

}  // namespace

BmReduction::BmReduction(const StochasticMatrix& psi, double eta, SubKind kind)
    : prior_(psi), eta_(eta), kind_(kind) {
  if (psi.size() == 0) throw std::invalid_argument("BmReduction: empty prior");
  if (kind == SubKind::plain)
    subs_ = make_subs<Mwu>(psi, eta);
  else
    subs_ = make_subs<Omwu>(psi, eta);
}

StochasticMatrix BmReduction::propose() const {
  const std::size_t d = dim();
  Matrix phi(d, d);
  auto fill = [&](std::size_t i, const ProbVector& row) {
    for (std::size_t j = 0; j < d; ++j) phi(i, j) = row[j];
  };
  if (const auto* plain = std::get_if<std::vector<Mwu>>(&subs_)) {
    for (std::size_t i = 0; i < d; ++i) fill(i, (*plain)[i].current());
  } else {
    const auto& opt = std::get<std::vector<Omwu>>(subs_);
    for (std::size_t i = 0; i < d; ++i) fill(i, opt[i].predict());
  }
  return StochasticMatrix(std::move(phi));
}

void BmReduction::update(const Matrix& loss_matrix) {
  const std::size_t d = dim();
  if (loss_matrix.rows() != d || loss_matrix.cols() != d)
    throw std::invalid_argument("BmReduction::update: dimension mismatch");
  std::visit(
      [&](auto& subs) {
        for (std::size_t i = 0; i < d; ++i) subs[i].update(loss_matrix.row(i));
      },
      subs_);
}

}  // namespace phireg
