#pragma once

#include <cstddef>
#include <vector>

#include "ranklab/distributions.hpp"
#include "ranklab/random.hpp"

namespace ranklab {

struct PosteriorOptions {
  /// Relative accuracy target for the normalising constant and moments.
  double tol = 1e-10;
  /// Bisect every quadrature panel once more after convergence (2x nodes).
  bool refine = false;
  /// Window doublings allowed when the boundary density is not negligible.
  int max_expansions = 12;
  /// Upper bound on the number of Gauss-Kronrod panels.
  std::size_t max_panels = 4000;
};

/// Discretised, normalised posterior of one latent value.
///
/// (nodes, weights) is a quadrature rule for the posterior density `values`.
/// For sampling and pairwise comparisons the grid also carries its CDF at
/// a finer set of points (panel ends and nodes); between those points the
/// mass is spread uniformly. A point mass has one node and a zero-width cell.
struct PosteriorGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> values;
  double mean = 0.0;
  double variance = 0.0;
  double log_norm_const = 0.0;

  /// Increasing cell boundaries and the CDF at each boundary (0 first, 1 last).
  std::vector<double> cell_edges;
  std::vector<double> cell_cdf;
  std::vector<double> cell_density;  // density at each edge; with cell_cdf gives a C1 cubic CDF

  bool is_point_mass() const { return nodes.size() == 1 && cell_edges.front() == cell_edges.back(); }
  double lower() const { return cell_edges.front(); }
  double upper() const { return cell_edges.back(); }
  /// CDF of the piecewise-uniform representation.
  double cdf(double theta) const;
};

/// Same representation, under the improper uniform prior.
using LikelihoodPosterior = PosteriorGrid;

PosteriorGrid posterior(const PriorSpec& prior, const ErrorModel& error, double x, double sigma,
                        const PosteriorOptions& options = {});
PosteriorGrid posterior(const PriorSpec& prior, const ErrorModel& error, double x, double sigma,
                        double tol);

/// Point mass at x (the sigma = 0 posterior).
PosteriorGrid point_mass_grid(double x, double log_norm_const = 0.0);

LikelihoodPosterior likelihood_posterior(const ErrorModel& error, double x, double sigma,
                                         const PosteriorOptions& options = {});

Moments conjugate_normal_posterior(double mu, double tau2, double x, double sigma);

/// P(A < B) for independent A ~ a, B ~ b; ties between equal point masses count one half.
double pairwise_less_prob(const PosteriorGrid& a, const PosteriorGrid& b);

std::vector<double> posterior_sample(const PosteriorGrid& g, RngStream& rng, std::size_t n);
/// Inverse CDF of the grid distribution at u in [0, 1].
double posterior_quantile(const PosteriorGrid& g, double u);

}  // namespace ranklab
