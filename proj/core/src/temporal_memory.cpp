#include "vlaforge/temporal_memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vlaforge/errors.hpp"
#include "vlaforge/util.hpp"

namespace vlaforge {

void MemoryDims::validate() const {
  if (d <= 0 || h <= 0 || m <= 0 || k < 0 || t <= 0) {
    throw RangeError("[temporal_memory] D, H, M, T must be positive and K non-negative");
  }
  if (d % h != 0) throw ShapeError("[temporal_memory] D must be divisible by H");
  if (k > m) throw RangeError("[temporal_memory] K must not exceed M");
}

MemoryDims MemoryDims::from_json(const nlohmann::json& block) {
  MemoryDims dims;
  if (!block.is_object()) return dims;
  try {
    dims.d = block.value("D", dims.d);
    dims.h = block.value("H", dims.h);
    dims.m = block.value("M", dims.m);
    dims.k = block.value("K", dims.k);
    dims.t = block.value("T", dims.t);
    dims.seed = block.value("seed", dims.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("[temporal_memory] ") + e.what());
  }
  try {
    dims.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return dims;
}

Vector Mlp::forward(const Vector& x) const {
  if (x.size() != w1.cols()) throw ShapeError("MLP input width mismatch");
  const Vector hidden = (w1 * x + b1).cwiseMax(0.0);
  return w2 * hidden + b2;
}

Matrix Mlp::forward_rows(const Matrix& x) const {
  if (x.cols() != w1.cols()) throw ShapeError("MLP input width mismatch");
  Matrix hidden = ((x * w1.transpose()).rowwise() + b1.transpose()).cwiseMax(0.0);
  return (hidden * w2.transpose()).rowwise() + b2.transpose();
}

namespace {

Matrix xavier(int rows, int cols, SeededStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = rng.uniform(-limit, limit);
  }
  return w;
}

Mlp make_mlp(int in, int hidden, int out, SeededStream& rng) {
  return Mlp{xavier(hidden, in, rng), Vector::Zero(hidden), xavier(out, hidden, rng),
             Vector::Zero(out)};
}

AttentionParams make_attention(int d, SeededStream& rng) {
  AttentionParams p;
  p.wq = xavier(d, d, rng);
  p.wk = xavier(d, d, rng);
  p.wv = xavier(d, d, rng);
  p.wo = xavier(d, d, rng);
  p.bq = p.bk = p.bv = p.bo = Vector::Zero(d);
  return p;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ShapeError(std::string(what) + " has non-finite entries");
}

}  // namespace

ModelParams ModelParams::init(const MemoryDims& dims) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  const int d = dims.d;
  SeededStream psi_rng(derive_seed(dims.seed, "psi"));
  SeededStream xi1_rng(derive_seed(dims.seed, "xi1"));
  SeededStream xi2_rng(derive_seed(dims.seed, "xi2"));
  SeededStream self_rng(derive_seed(dims.seed, "self_attn"));
  SeededStream cross_rng(derive_seed(dims.seed, "cross_attn"));
  p.psi = make_mlp(3, 2 * d, d, psi_rng);
  p.xi1 = make_mlp(kMotionInputDim, 2 * d, d, xi1_rng);
  p.xi2 = make_mlp(kMotionInputDim, 2 * d, d, xi2_rng);
  p.self_attn = make_attention(d, self_rng);
  p.cross_attn = make_attention(d, cross_rng);
  return p;
}

void QueryState::validate(int d) const {
  const auto m = centers.rows();
  if (centers.cols() != 3) throw ShapeError("centers must be M x 3");
  if (features.rows() != m || features.cols() != d) throw ShapeError("features must be M x D");
  if (pos_embed.size() != 0 && (pos_embed.rows() != m || pos_embed.cols() != d)) {
    throw ShapeError("pos_embed must be M x D");
  }
  if (propagated.size() != 0 && propagated.cols() != d) throw ShapeError("propagated must be K x D");
  if (!tags.empty() && static_cast<Eigen::Index>(tags.size()) != m) {
    throw ShapeError("one tag per query row required");
  }
  if (!propagated_tags.empty() &&
      static_cast<Eigen::Index>(propagated_tags.size()) != propagated.rows()) {
    throw ShapeError("one tag per propagated row required");
  }
  require_finite(centers, "centers");
  require_finite(features, "features");
  require_finite(pos_embed, "pos_embed");
  require_finite(propagated, "propagated");
}

RigidTransform compose_ego_motion(const RigidTransform& e_t, const RigidTransform& e_prev) {
  const Mat3 r = e_t.rotation() * e_prev.rotation();
  const Vec3 t = e_t.rotation() * e_prev.translation() + e_t.translation();
  return RigidTransform(r, t);  // validates orthonormality
}

Matrix align_centers(const RigidTransform& transform, const Matrix& centers) {
  if (centers.cols() != 3) throw ShapeError("centers must be M x 3");
  Matrix out = centers * transform.rotation().transpose();
  out.rowwise() += transform.translation().transpose();
  return out;
}

Vector motion_input(const RigidTransform& transform, double speed, double dt) {
  Vector x(kMotionInputDim);
  const Mat3& r = transform.rotation();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) x(3 * i + j) = r(i, j);
  }
  x.segment<3>(9) = transform.translation();
  x(12) = speed;
  x(13) = dt;
  return x;
}

ModulationCoeffs modulation_coeffs(const RigidTransform& transform, double speed, double dt,
                                   const ModelParams& params) {
  if (!(dt > 0.0)) throw RangeError("time gap dt must be positive");
  if (params.xi1.in_dim() != kMotionInputDim || params.xi2.in_dim() != kMotionInputDim ||
      params.xi1.out_dim() != params.dims.d || params.xi2.out_dim() != params.dims.d) {
    throw ShapeError("xi maps must be 14 -> D");
  }
  const Vector x = motion_input(transform, speed, dt);
  return {params.xi1.forward(x), params.xi2.forward(x)};
}

Matrix layer_norm_rows(const Matrix& x, double eps) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const auto centered = x.row(i).array() - mean;
    const double var = centered.square().mean();
    out.row(i) = (centered / std::sqrt(var + eps)).matrix();
  }
  return out;
}

QueryState modulate(const QueryState& state, const ModulationCoeffs& coeffs,
                    const ModelParams& params) {
  const int d = params.dims.d;
  state.validate(d);
  if (coeffs.alpha.size() != d || coeffs.beta.size() != d) throw ShapeError("alpha/beta must be D");
  QueryState out = state;
  auto apply = [&](const Matrix& x) {
    Matrix y = layer_norm_rows(x);
    y.array().rowwise() *= coeffs.alpha.transpose().array();
    y.rowwise() += coeffs.beta.transpose();
    return y;
  };
  out.pos_embed = apply(params.psi.forward_rows(state.centers));
  out.features = apply(state.features);
  return out;
}

AttentionResult multi_head_attention(const Matrix& queries, const Matrix& keys,
                                     const Matrix& values, const AttentionParams& p, int heads,
                                     const Matrix& key_addend) {
  const auto d = p.wq.rows();
  if (heads <= 0 || d % heads != 0) throw ShapeError("D must be divisible by the head count");
  if (queries.cols() != d || keys.cols() != d || values.cols() != d) {
    throw ShapeError("attention inputs must be D wide");
  }
  if (keys.rows() != values.rows() || keys.rows() == 0) {
    throw ShapeError("attention needs matching, non-empty key and value rows");
  }
  if (key_addend.size() != 0 && (key_addend.rows() != queries.rows() || key_addend.cols() != d)) {
    throw ShapeError("key addend must have one D-vector per query row");
  }
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix q = (queries * p.wq).rowwise() + p.bq.transpose();
  const Matrix k = (keys * p.wk).rowwise() + p.bk.transpose();
  const Matrix v = (values * p.wv).rowwise() + p.bv.transpose();
  // (k_j + a_i) Wk + bk = k_j + a_i Wk
  const Matrix shift = key_addend.size() != 0 ? Matrix(key_addend * p.wk)
                                              : Matrix::Zero(queries.rows(), d);

  AttentionResult result;
  Matrix concat(queries.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Eigen::Index c0 = h * dh;
    Matrix w(queries.rows(), keys.rows());
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
      const auto qi = q.row(i).segment(c0, dh);
      const auto si = shift.row(i).segment(c0, dh);
      for (Eigen::Index j = 0; j < keys.rows(); ++j) {
        w(i, j) = qi.dot(k.row(j).segment(c0, dh) + si) * scale;
      }
      const double mx = w.row(i).maxCoeff();
      w.row(i) = (w.row(i).array() - mx).exp().matrix();
      w.row(i) /= w.row(i).sum();
    }
    concat.middleCols(c0, dh) = w * v.middleCols(c0, dh);
    result.weights.push_back(std::move(w));
  }
  result.output = (concat * p.wo).rowwise() + p.bo.transpose();
  return result;
}

namespace {

Matrix stacked_queries(const QueryState& state, int d) {
  Matrix x(state.propagated.rows() + state.features.rows(), d);
  if (state.propagated.rows() > 0) x.topRows(state.propagated.rows()) = state.propagated;
  x.bottomRows(state.features.rows()) = state.features;
  return x;
}

}  // namespace

AttentionResult hybrid_attention(const QueryState& state, const ModelParams& params) {
  const int d = params.dims.d;
  state.validate(d);
  const Matrix x = stacked_queries(state, d);
  return multi_head_attention(x, x, x, params.self_attn, params.dims.h);
}

AttentionResult cross_modal_aggregate(const QueryState& state, const Matrix& image,
                                      const ModelParams& params) {
  const int d = params.dims.d;
  state.validate(d);
  if (image.cols() != d || image.rows() == 0) throw ShapeError("image tokens must be T x D");
  require_finite(image, "image features");
  if (state.pos_embed.rows() != state.features.rows()) {
    throw ShapeError("pos_embed rows for the current queries are required");
  }
  const Matrix x = stacked_queries(state, d);
  Matrix addend = Matrix::Zero(x.rows(), d);
  addend.bottomRows(state.pos_embed.rows()) = state.pos_embed;
  return multi_head_attention(x, image, image, params.cross_attn, params.dims.h, addend);
}

QueryState propagate_topk(const Vector& scores, const QueryState& state, int k) {
  const auto m = state.features.rows();
  if (scores.size() != m) throw ShapeError("one score per query row required");
  if (k < 0 || k > m) throw RangeError("k must lie in [0, M]");
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  QueryState out = state;
  out.propagated.resize(k, state.features.cols());
  out.propagated_tags.clear();
  for (int r = 0; r < k; ++r) {
    const int src = order[static_cast<std::size_t>(r)];
    out.propagated.row(r) = state.features.row(src);
    out.propagated_tags.push_back(state.tags.empty() ? src
                                                     : state.tags[static_cast<std::size_t>(src)]);
  }
  return out;
}

// ------------------------------------------------------------------ losses

namespace {

constexpr double kProbFloor = 1e-12;

void same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": prediction and target shapes differ");
  }
}

}  // namespace

double focal_loss(const Matrix& prob, const Matrix& target, double alpha, double gamma) {
  same_shape(prob, target, "focal loss");
  if (prob.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < prob.rows(); ++i) {
    for (Eigen::Index c = 0; c < prob.cols(); ++c) {
      const double p = prob(i, c);
      if (target(i, c) > 0.5) {
        sum += -alpha * std::pow(1.0 - p, gamma) * std::log(std::max(p, kProbFloor));
      } else {
        sum += -(1.0 - alpha) * std::pow(p, gamma) * std::log(std::max(1.0 - p, kProbFloor));
      }
    }
  }
  return sum / static_cast<double>(prob.rows());
}

Matrix focal_loss_grad(const Matrix& prob, const Matrix& target, double alpha, double gamma) {
  same_shape(prob, target, "focal loss");
  Matrix g = Matrix::Zero(prob.rows(), prob.cols());
  if (prob.rows() == 0) return g;
  const double n = static_cast<double>(prob.rows());
  for (Eigen::Index i = 0; i < prob.rows(); ++i) {
    for (Eigen::Index c = 0; c < prob.cols(); ++c) {
      const double p = std::clamp(prob(i, c), kProbFloor, 1.0 - kProbFloor);
      if (target(i, c) > 0.5) {
        g(i, c) = alpha * (gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p) -
                           std::pow(1.0 - p, gamma) / p);
      } else {
        g(i, c) = -(1.0 - alpha) * (gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) -
                                    std::pow(p, gamma) / (1.0 - p));
      }
      g(i, c) /= n;
    }
  }
  return g;
}

double l1_loss(const Matrix& pred, const Matrix& target) {
  same_shape(pred, target, "L1 loss");
  if (pred.size() == 0) return 0.0;
  return (pred - target).cwiseAbs().sum() / static_cast<double>(pred.size());
}

Matrix l1_loss_grad(const Matrix& pred, const Matrix& target) {
  same_shape(pred, target, "L1 loss");
  if (pred.size() == 0) return Matrix::Zero(pred.rows(), pred.cols());
  const double n = static_cast<double>(pred.size());
  return (pred - target).unaryExpr([n](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)) / n; });
}

double perception_loss(const PerceptionBatch& b, const LossWeights& w) {
  if (w.cls < 0 || w.box < 0 || w.map_cls < 0 || w.map_reg < 0) {
    throw RangeError("loss weights must be non-negative");
  }
  return w.cls * focal_loss(b.cls_pred, b.cls_tgt) + w.box * l1_loss(b.box_pred, b.box_tgt) +
         w.map_cls * focal_loss(b.map_cls_pred, b.map_cls_tgt) +
         w.map_reg * l1_loss(b.map_reg_pred, b.map_reg_tgt);
}

PerceptionGrad perception_loss_grad(const PerceptionBatch& b, const LossWeights& w) {
  return {w.cls * focal_loss_grad(b.cls_pred, b.cls_tgt), w.box * l1_loss_grad(b.box_pred, b.box_tgt),
          w.map_cls * focal_loss_grad(b.map_cls_pred, b.map_cls_tgt),
          w.map_reg * l1_loss_grad(b.map_reg_pred, b.map_reg_tgt)};
}

double total_loss(double l_pc, double l_ce) {
  if (!std::isfinite(l_pc) || !std::isfinite(l_ce) || l_pc < 0.0 || l_ce < 0.0) {
    throw RangeError("loss terms must be finite and non-negative");
  }
  return l_pc + l_ce;
}

double token_cross_entropy(const Matrix& logits, const std::vector<int>& targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.rows() || logits.rows() == 0) {
    throw ShapeError("one target per logit row required");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= logits.cols()) throw RangeError("target index out of vocabulary");
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    sum += lse - logits(i, t);
  }
  return sum / static_cast<double>(logits.rows());
}

// -------------------------------------------------------------------- demo

namespace {

nlohmann::json stats(const Matrix& m) {
  const double mean = m.size() ? m.mean() : 0.0;
  const double var = m.size() ? (m.array() - mean).square().mean() : 0.0;
  return {{"shape", {m.rows(), m.cols()}},
          {"mean", mean},
          {"std", std::sqrt(var)},
          {"min", m.size() ? m.minCoeff() : 0.0},
          {"max", m.size() ? m.maxCoeff() : 0.0}};
}

double max_row_sum_deviation(const std::vector<Matrix>& weights) {
  double dev = 0.0;
  for (const auto& w : weights) {
    dev = std::max(dev, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());
  }
  return dev;
}

Matrix random_matrix(int rows, int cols, SeededStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

nlohmann::json memory_demo(const MemoryDims& dims) {
  const ModelParams params = ModelParams::init(dims);
  SeededStream rng(derive_seed(dims.seed, "demo"));

  QueryState frame0;
  frame0.centers = random_matrix(dims.m, 3, rng) * 10.0;
  frame0.features = random_matrix(dims.m, dims.d, rng);
  frame0.pos_embed = params.psi.forward_rows(frame0.centers);
  for (int i = 0; i < dims.m; ++i) frame0.tags.push_back(i);
  Vector scores(dims.m);
  for (int i = 0; i < dims.m; ++i) scores(i) = rng.next_unit();
  const QueryState carried = propagate_topk(scores, frame0, dims.k);

  // ego moves 5 m forward while yawing 5 degrees over 0.5 s
  const RigidTransform e_prev = RigidTransform::from_yaw(0.0);
  const RigidTransform e_t = RigidTransform::from_yaw(deg_to_rad(5.0), Vec3(5.0, 0.2, 0.0));
  const RigidTransform motion = compose_ego_motion(e_t, e_prev);
  const double speed = 10.0;
  const double dt = 0.5;

  QueryState frame1 = carried;
  frame1.centers = align_centers(motion, carried.centers);
  const ModulationCoeffs coeffs = modulation_coeffs(motion, speed, dt, params);
  const QueryState modulated = modulate(frame1, coeffs, params);
  const AttentionResult self = hybrid_attention(modulated, params);
  const Matrix image = random_matrix(dims.t, dims.d, rng);
  const AttentionResult cross = cross_modal_aggregate(modulated, image, params);

  return {
      {"dims", {{"D", dims.d}, {"H", dims.h}, {"M", dims.m}, {"K", dims.k}, {"T", dims.t},
                {"seed", dims.seed}}},
      {"ego_motion",
       {{"yaw_deg", rad_to_deg(motion.yaw())},
        {"translation", {motion.translation().x(), motion.translation().y(),
                         motion.translation().z()}}}},
      {"propagated_tags", carried.propagated_tags},
      {"aligned_centers", stats(frame1.centers)},
      {"alpha", stats(coeffs.alpha)},
      {"beta", stats(coeffs.beta)},
      {"pos_embed", stats(modulated.pos_embed)},
      {"features", stats(modulated.features)},
      {"self_attention", {{"output", stats(self.output)},
                          {"max_row_sum_deviation", max_row_sum_deviation(self.weights)}}},
      {"cross_attention", {{"output", stats(cross.output)},
                           {"max_row_sum_deviation", max_row_sum_deviation(cross.weights)}}},
  };
}

}  // namespace vlaforge
