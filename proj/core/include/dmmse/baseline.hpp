#pragma once

#include "dmmse/linalg.hpp"
#include "dmmse/model.hpp"
#include "dmmse/topology.hpp"
#include "dmmse/trajectory.hpp"

#include <span>

namespace dmmse {

/// Row-stochastic weights supported on closed neighborhoods: row i holds the
/// weights agent i puts on itself and its neighbors.
struct CombinerMatrix {
  Matrix weights;

  double operator()(Agent i, Agent j) const { return weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
};

/// lambda_{i,j} proportional to sigma_j^-2 over N_i and i. Throws
/// invalid-input on non-positive or non-finite stds.
CombinerMatrix relative_variance_combiner(const NetworkTopology& topo, std::span<const double> noise_stds);

/// Laplacian rule: 1/n_max on each neighbor and the remainder on self, where
/// n_max is the largest closed-neighborhood size.
CombinerMatrix laplacian_combiner(const NetworkTopology& topo);

struct DrlsOptions {
  double forgetting = 1.0;  // in (0, 1]
  double ridge = 1e-3;      // P_0 = I / ridge
};

/// Diffusion RLS. Each round every agent runs incremental RLS updates over
/// its own current measurement and its neighbors' previous-round measurements
/// (Laplacian weights, noise whitened), then combines its intermediate
/// estimate with the neighbors' previous-round ones. The one-round lag keeps
/// the baseline inside the same information structure as the other
/// algorithms.
EstimateTrajectory drls_run(const NetworkTopology& topo, const WorldModel& model, const CombinerMatrix& combiner,
                            const MeasurementTrace& trace, const DrlsOptions& options = {});

}  // namespace dmmse
