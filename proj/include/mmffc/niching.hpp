#pragma once

#include "mmffc/genome.hpp"
#include "mmffc/rng.hpp"

#include <vector>

namespace mmffc {

struct NicheAssignment {
  std::vector<std::vector<Index>> niches;
  DecodedProgram reference;
};

/// ceil(S / NS).
int niche_count(int population_size, int niche_size);

/// Crowding clustering. A fresh random reference program R is drawn; each
/// niche is seeded by the unclustered program Z closest to R and filled with
/// the programs closest to Z, all under Hamming distance. Every niche has
/// niche_size members except possibly the last. Ties go to the lowest index.
NicheAssignment crowding_cluster(const std::vector<DecodedProgram>& population, int niche_size,
                                 const ProgramShape& shape, Rng& rng);

}  // namespace mmffc
