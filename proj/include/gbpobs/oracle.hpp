#pragma once

#include <vector>

#include "gbpobs/islands.hpp"
#include "gbpobs/network.hpp"

namespace gbpobs {

/// Branches whose flow is determined by the rows of `j`: branch (i, j) is
/// observable iff e_i - e_j lies in the row space, equivalently iff every
/// null-space vector takes equal values at i and j.
std::vector<char> observable_branches(const PowerNetwork& network, const SparseJacobian& j);

/// Exact island partition.
///
/// Injections incident to an unobservable branch are removed and branch
/// observability recomputed until nothing changes; islands are the connected
/// components over the observable branches that remain.
IslandPartition oracle_islands(const PowerNetwork& network, const SparseJacobian& j);

/// Flow union-find followed by reducible-injection merging to a fixpoint.
IslandPartition topological_islands(const PowerNetwork& network, const MeasurementSet& ms);

/// True iff every island of `fine` lies inside one island of `coarse`.
bool is_refinement(const IslandPartition& fine, const IslandPartition& coarse);

}  // namespace gbpobs
