#include "cellnet/kernels.hpp"

#include <omp.h>

#include "cellnet/error.hpp"

namespace cellnet::kernels {

namespace {

void fill_row(const Monoid& m, CayleyTable& t, std::size_t i) {
  const std::size_t n = m.size();
  t.at(i, 0) = static_cast<ElementIndex>(i);
  for (std::size_t j = 1; j < n; ++j) {
    const auto jj = static_cast<ElementIndex>(j);
    t.at(i, j) = m.right_multiply(t.at(i, m.parent(jj)), m.last_letter(jj));
  }
}

}  // namespace

CayleyTable cayley_table_serial(const Monoid& m) {
  CayleyTable t{m.size(), std::vector<ElementIndex>(m.size() * m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) fill_row(m, t, i);
  return t;
}

CayleyTable cayley_table_parallel(const Monoid& m) {
  CayleyTable t{m.size(), std::vector<ElementIndex>(m.size() * m.size())};
  const auto n = static_cast<std::int64_t>(m.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) fill_row(m, t, static_cast<std::size_t>(i));
  return t;
}

CayleyTable cayley_table_by_composition(const Monoid& m) {
  CayleyTable t{m.size(), std::vector<ElementIndex>(m.size() * m.size())};
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      auto found = m.find(compose(m.element(static_cast<ElementIndex>(i)),
                                  m.element(static_cast<ElementIndex>(j))));
      if (!found) fail(ErrorKind::kInternalError, "closure is missing a product");
      t.at(i, j) = *found;
    }
  }
  return t;
}

}  // namespace cellnet::kernels
