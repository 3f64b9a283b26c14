#pragma once

#include "pose6d/geom.hpp"
#include "pose6d/image.hpp"
#include "pose6d/refine.hpp"

#include <span>

namespace pose6d {

struct LossWeights {
  double lambda_pose = 1.0;
  double lambda_conf = 1.0;
  double lambda_mask = 0.5;
  double w_rotation = 1.0;
  double w_translation = 1.0;
  double alpha_conf = 1.0;

  /// Throws std::invalid_argument on negative weights or alpha_conf <= 0.
  void validate() const;
};

/// w_R |R_gt - exp(dR) R|_F + w_T |T_gt - (T + dT)|.
double pose_loss(const Pose& gt, const Pose& current, const IncrementPrediction& inc, const LossWeights& w = {});

/// |log(R_pred^T R_gt)|_F + |t_pred - t_gt|, where the Frobenius norm of the
/// skew log equals sqrt(2) times the rotation angle.
double geodesic_error(const Pose& pred, const Pose& gt);

/// (1/N) sum_k (c_k L_k - alpha ln c_k), confidences clamped below at 1e-7.
/// Throws std::invalid_argument on length mismatch or an empty list.
double confidence_loss(std::span<const double> errors, std::span<const double> confidences,
                       const LossWeights& w = {});

/// Occlusion target: amodal & !visible.
BinaryMask occlusion_target(const BinaryMask& amodal, const BinaryMask& visible);

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
/// Throws std::invalid_argument on dimension mismatch.
double mask_bce(const ProbabilityMap& pred, const BinaryMask& target);

struct LossParts {
  double pose = 0.0;
  double conf = 0.0;
  double mask = 0.0;
};

double total_loss(const LossParts& parts, const LossWeights& w = {});

}  // namespace pose6d
