#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "vlaforge/geometry.hpp"

namespace vlaforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kLayerNormEps = 1e-12;
inline constexpr int kMotionInputDim = 14;  // R (9, row-major) + t (3) + v + dt

struct MemoryDims {
  int d = 32;  // feature width
  int h = 4;   // attention heads
  int m = 16;  // current queries
  int k = 8;   // propagated queries
  int t = 64;  // image tokens
  std::uint64_t seed = 7;

  void validate() const;  // ShapeError / RangeError
  static MemoryDims from_json(const nlohmann::json& block);
};

// One-hidden-layer ReLU map: y = W2 relu(W1 x + b1) + b2.
struct Mlp {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  Vector forward(const Vector& x) const;
  Matrix forward_rows(const Matrix& x) const;  // each row is one input
  int in_dim() const { return static_cast<int>(w1.cols()); }
  int out_dim() const { return static_cast<int>(w2.rows()); }
};

struct AttentionParams {
  Matrix wq, wk, wv, wo;  // D x D, applied as x * W
  Vector bq, bk, bv, bo;
};

struct LossWeights {
  double cls = 1.0;       // lambda_c
  double box = 1.0;       // lambda_r
  double map_cls = 1.0;   // lambda_mc
  double map_reg = 1.0;   // lambda_mr
};

struct ModelParams {
  MemoryDims dims;
  Mlp psi;  // 3 -> 2D -> D
  Mlp xi1;  // 14 -> 2D -> D (alpha)
  Mlp xi2;  // 14 -> 2D -> D (beta)
  AttentionParams self_attn;
  AttentionParams cross_attn;
  LossWeights weights;

  // Seeded Xavier-uniform weights, zero biases.
  static ModelParams init(const MemoryDims& dims);
};

struct QueryState {
  Matrix centers;     // M x 3
  Matrix features;    // M x D
  Matrix pos_embed;   // M x D
  Matrix propagated;  // K x D
  std::vector<int> tags;             // identity of each current row
  std::vector<int> propagated_tags;  // identity of each propagated row

  void validate(int d) const;  // ShapeError on inconsistent shapes or non-finite entries
};

struct ModulationCoeffs {
  Vector alpha;
  Vector beta;
};

// E_t * E_{t-1}, as written. Throws GeometryError when the result is not a
// proper rotation within 1e-9.
RigidTransform compose_ego_motion(const RigidTransform& e_t, const RigidTransform& e_prev);

// Rotation then translation, row by row.
Matrix align_centers(const RigidTransform& transform, const Matrix& centers);

Vector motion_input(const RigidTransform& transform, double speed, double dt);

// Throws RangeError for dt <= 0, ShapeError for mismatched maps.
ModulationCoeffs modulation_coeffs(const RigidTransform& transform, double speed, double dt,
                                   const ModelParams& params);

// Per-row normalization to zero mean and unit variance (no affine part).
Matrix layer_norm_rows(const Matrix& x, double eps = kLayerNormEps);

// pos_embed <- alpha * LN(psi(centers)) + beta; features <- alpha * LN(features) + beta.
QueryState modulate(const QueryState& state, const ModulationCoeffs& coeffs,
                    const ModelParams& params);

struct AttentionResult {
  Matrix output;                 // rows x D
  std::vector<Matrix> weights;   // one rows x keys matrix per head
};

// Multi-head scaled dot-product attention. `key_addend`, when non-empty,
// holds one D-vector per query row that is added to every key input for
// that query.
AttentionResult multi_head_attention(const Matrix& queries, const Matrix& keys,
                                     const Matrix& values, const AttentionParams& p, int heads,
                                     const Matrix& key_addend = Matrix());

// Self-attention over [propagated; features].
AttentionResult hybrid_attention(const QueryState& state, const ModelParams& params);

// Queries [propagated; features] attend to image tokens; keys carry the
// positional embedding of the querying row (zero for propagated rows).
AttentionResult cross_modal_aggregate(const QueryState& state, const Matrix& image,
                                      const ModelParams& params);

// Copies the k best-scoring feature rows (stable by row index on ties)
// into the propagated set. Throws RangeError when k > M, ShapeError when
// scores do not match M.
QueryState propagate_topk(const Vector& scores, const QueryState& state, int k);

// --- losses ---

struct PerceptionBatch {
  Matrix cls_pred, cls_tgt;          // N x C probabilities / one-hot
  Matrix box_pred, box_tgt;          // N x B
  Matrix map_cls_pred, map_cls_tgt;  // lanes
  Matrix map_reg_pred, map_reg_tgt;
};

// Sum over classes, mean over pairs; alpha 0.25, gamma 2.
double focal_loss(const Matrix& prob, const Matrix& target, double alpha = 0.25,
                  double gamma = 2.0);
Matrix focal_loss_grad(const Matrix& prob, const Matrix& target, double alpha = 0.25,
                       double gamma = 2.0);
// Mean absolute difference over all elements.
double l1_loss(const Matrix& pred, const Matrix& target);
Matrix l1_loss_grad(const Matrix& pred, const Matrix& target);

double perception_loss(const PerceptionBatch& batch, const LossWeights& weights);

struct PerceptionGrad {
  Matrix cls, box, map_cls, map_reg;
};
PerceptionGrad perception_loss_grad(const PerceptionBatch& batch, const LossWeights& weights);

// Exact sum; RangeError for negative or non-finite terms.
double total_loss(double l_pc, double l_ce);

// Mean next-token cross-entropy from logits (rows) and target indices.
double token_cross_entropy(const Matrix& logits, const std::vector<int>& targets);

// Scripted two-frame episode; returns tensor statistics for every stage.
nlohmann::json memory_demo(const MemoryDims& dims);

}  // namespace vlaforge
