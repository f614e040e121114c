#include "mmffc/niching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mmffc {

int niche_count(int population_size, int niche_size) {
  if (population_size < 1) throw std::invalid_argument("population must be non-empty");
  if (niche_size < 1 || niche_size > population_size)
    throw std::invalid_argument("niche size must lie in [1, population size]");
  return (population_size + niche_size - 1) / niche_size;
}

NicheAssignment crowding_cluster(const std::vector<DecodedProgram>& population, int niche_size,
                                 const ProgramShape& shape, Rng& rng) {
  const auto s_total = static_cast<int>(population.size());
  const int a = niche_count(s_total, niche_size);

  NicheAssignment out;
  out.reference = decode(random_position(shape, rng), shape);

  std::vector<Index> pool(static_cast<std::size_t>(s_total));
  std::iota(pool.begin(), pool.end(), Index{0});
  int remaining = s_total;

  for (int i = 0; i < a; ++i) {
    const int ns = remaining > niche_size ? niche_size : remaining;

    auto z_it = std::min_element(pool.begin(), pool.end(), [&](Index l, Index r) {
      const auto dl = hamming(population[static_cast<std::size_t>(l)], out.reference);
      const auto dr = hamming(population[static_cast<std::size_t>(r)], out.reference);
      return dl < dr || (dl == dr && l < r);
    });
    const Index z = *z_it;
    pool.erase(z_it);

    // Pool stays sorted by index, so stable_sort keeps the lowest-index tie-break.
    std::vector<Index> by_distance = pool;
    const auto& zp = population[static_cast<std::size_t>(z)];
    std::stable_sort(by_distance.begin(), by_distance.end(), [&](Index l, Index r) {
      return hamming(population[static_cast<std::size_t>(l)], zp) < hamming(population[static_cast<std::size_t>(r)], zp);
    });

    std::vector<Index> niche{z};
    niche.insert(niche.end(), by_distance.begin(), by_distance.begin() + (ns - 1));
    std::sort(niche.begin() + 1, niche.end());
    for (std::size_t k = 1; k < niche.size(); ++k) pool.erase(std::find(pool.begin(), pool.end(), niche[k]));
    remaining -= ns;
    out.niches.push_back(std::move(niche));
  }
  return out;
}

}  // namespace mmffc
