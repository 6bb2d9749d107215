#pragma once

#include "rpgrasp/contact.hpp"

#include <array>
#include <ostream>

namespace rpgrasp {

struct QueryKernel {
  Pose pose;  ///< world-frame link pose ŝ
  double weight = 0.0;
};

/// Weighted kernel density over world-frame poses of one link on a test cloud.
/// An empty density marks a link whose contact model is empty.
class QueryDensity {
 public:
  QueryDensity() = default;
  QueryDensity(std::size_t link, int grasp_id, std::vector<QueryKernel> kernels, Bandwidth bandwidth,
               double mass);

  std::size_t link() const { return link_; }
  int grasp_id() const { return grasp_id_; }
  bool empty() const { return kernels_.empty(); }
  std::size_t size() const { return kernels_.size(); }
  const std::vector<QueryKernel>& kernels() const { return kernels_; }
  const Bandwidth& bandwidth() const { return bandwidth_; }
  /// Mean descriptor marginal over the samples before renormalization: how well
  /// the test cloud supports this link's contact model.
  double mass() const { return mass_; }
  /// Global factor applied to evaluate() (1 by default); sampling ignores it.
  double scale() const { return scale_; }
  /// Copy whose evaluate() is multiplied by c > 0.
  QueryDensity scaled(double c) const;

  /// Q(s) = Σ_j w_j N3(p | p̂_j, σ_p) Θ(q | q̂_j, σ_q).
  double evaluate(const Pose& s) const;
  Pose sample(Rng& rng) const;

 private:
  std::size_t link_ = 0;
  int grasp_id_ = 0;
  std::vector<QueryKernel> kernels_;
  std::vector<double> cumulative_;
  // Kernel parameters laid out for the evaluation loop: px py pz qw qx qy qz w.
  std::vector<std::array<double, 8>> packed_;
  Bandwidth bandwidth_;
  double mass_ = 0.0;
  double scale_ = 1.0;
};

/// Samples K_Q link poses: (v̂, r̂) ~ test density, û ~ M(u | r̂) (the contact
/// kernels reweighted by their descriptor factor), ŝ = v̂ ∘ û, weight M(r̂).
/// Returns an empty density for an empty model; throws DataError if every
/// sampled descriptor misses the model (all weights zero).
QueryDensity build_query_density(const ContactModel& model, const FeatureDensity& test, std::size_t kernel_count,
                                 std::uint64_t seed);

double eval_query(const QueryDensity& qd, const Pose& s);
/// Throws std::invalid_argument on an empty density.
Pose sample_query(const QueryDensity& qd, std::uint64_t seed);

/// Columns: px,py,pz,qw,qx,qy,qz,weight.
void write_query_csv(std::ostream& out, const QueryDensity& qd);

}  // namespace rpgrasp
