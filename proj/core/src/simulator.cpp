/*
 * Copyright 2026 The miaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "miaudit/simulator.hpp"

#include <cmath>
#include <numbers>

#include "miaudit/error.hpp"
#include "miaudit/similarity.hpp"

namespace miaudit {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kTagGenerator = 0x6e1;
constexpr std::uint64_t kTagPool = 0x9001;
constexpr std::uint64_t kTagInit = 0x1417;
constexpr std::uint64_t kTagTrain = 0x7a17;
constexpr std::uint64_t kTagExport = 0xe4;

constexpr double kNoiseStd = 0.05;
constexpr double kMaskFraction = 0.1;
constexpr double kRotateDegrees = 5.0;
constexpr double kScaleFactor = 0.9;
constexpr double kShiftNorm = 0.1;  // times sqrt(dim)
constexpr double kFlipFraction = 0.1;

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
  }
  return m;
}

Eigen::MatrixXd uniform_init(Rng& rng, std::size_t rows, std::size_t cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

Tower init_tower(Rng& rng, std::size_t in, std::size_t hidden, std::size_t embed) {
  Tower t;
  t.w1 = uniform_init(rng, hidden, in);
  t.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden));
  t.w2 = uniform_init(rng, embed, hidden);
  t.b2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(embed));
  return t;
}

struct TowerCache {
  Eigen::MatrixXd pre;   // x w1^T + b1
  Eigen::MatrixXd h;     // relu(pre)
  Eigen::VectorXd norm;  // row norms of h w2^T + b2
  Eigen::MatrixXd u;     // normalized output
};

TowerCache tower_forward(const Tower& t, const Eigen::MatrixXd& x) {
  TowerCache c;
  c.pre = (x * t.w1.transpose()).rowwise() + t.b1.transpose();
  c.h = c.pre.cwiseMax(0.0);
  Eigen::MatrixXd e = (c.h * t.w2.transpose()).rowwise() + t.b2.transpose();
  c.norm = e.rowwise().norm();
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    if (c.norm(i) == 0.0) throw DomainError("tower output is the zero vector; cannot normalize");
  }
  c.u = e.array().colwise() / c.norm.array();
  return c;
}

Tower tower_backward(const Tower& t, const TowerCache& c, const Eigen::MatrixXd& x, const Eigen::MatrixXd& du) {
  const Eigen::VectorXd dots = (c.u.array() * du.array()).rowwise().sum();
  Eigen::MatrixXd de = du - (c.u.array().colwise() * dots.array()).matrix();
  de.array().colwise() /= c.norm.array();
  Tower g;
  g.w2 = de.transpose() * c.h;
  g.b2 = de.colwise().sum().transpose();
  const Eigen::MatrixXd dz = ((de * t.w2).array() * (c.pre.array() > 0.0).cast<double>()).matrix();
  g.w1 = dz.transpose() * x;
  g.b1 = dz.colwise().sum().transpose();
  return g;
}

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
}

void append(std::vector<double>& out, const Eigen::VectorXd& v) { out.insert(out.end(), v.data(), v.data() + v.size()); }

void take(const std::vector<double>& in, std::size_t& pos, Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = in[pos++];
  }
}

void take(const std::vector<double>& in, std::size_t& pos, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = in[pos++];
}

std::size_t tower_size(const Tower& t) {
  return static_cast<std::size_t>(t.w1.size() + t.b1.size() + t.w2.size() + t.b2.size());
}

double tower_sq(const Tower& t) {
  return t.w1.squaredNorm() + t.b1.squaredNorm() + t.w2.squaredNorm() + t.b2.squaredNorm();
}

void sgd_step(Tower& t, const Tower& g, double lr) {
  t.w1 -= lr * g.w1;
  t.b1 -= lr * g.b1;
  t.w2 -= lr * g.w2;
  t.b2 -= lr * g.b2;
}

EmbeddingVec to_embedding(const Eigen::RowVectorXd& row) {
  std::vector<float> v(static_cast<std::size_t>(row.size()));
  for (Eigen::Index i = 0; i < row.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(row(i));
  return EmbeddingVec(std::move(v));
}

std::vector<std::size_t> first_of_permutation(Rng& rng, std::size_t dim, std::size_t count) {
  std::vector<std::size_t> p = rng.sample_without_replacement(dim, count);
  return p;
}

}  // namespace

void validate(const SimConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid simulator config: ") + what);
  };
  need(c.latent_dim > 0, "latent_dim must be positive");
  need(c.input_dim_img >= 2 && c.input_dim_txt >= 2, "input dims must be >= 2");
  need(c.hidden_dim > 0, "hidden_dim must be positive");
  need(c.embed_dim > 0, "embed_dim must be positive");
  need(c.embed_dim <= c.input_dim_img && c.embed_dim <= c.input_dim_txt, "embed_dim must not exceed input dims");
  need(c.n_train > 0 && c.n_nonmember_in > 0 && c.n_nonmember_shift > 0, "pool sizes must be positive");
  need(std::isfinite(c.noise_std) && c.noise_std >= 0.0, "noise_std must be non-negative");
  need(std::isfinite(c.shift_scale), "shift_scale must be finite");
  need(std::isfinite(c.temperature) && c.temperature > 0.0, "temperature must be positive");
  need(std::isfinite(c.lr) && c.lr > 0.0, "lr must be positive");
  need(c.batch >= 2, "batch must be >= 2");
  need(std::isfinite(c.weight_decay) && c.weight_decay >= 0.0, "weight_decay must be >= 0");
}

std::string to_string(Pool pool) {
  switch (pool) {
    case Pool::kMember: return "member";
    case Pool::kNonMemberIn: return "nonmember_in";
    case Pool::kNonMemberShift: return "nonmember_shift";
  }
  return "?";
}

Generator make_generator(const SimConfig& cfg) {
  validate(cfg);
  Rng rng(derive_seed(cfg.seed, {kTagGenerator}));
  const auto latent = static_cast<Eigen::Index>(cfg.latent_dim);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  Generator g;
  g.a = gaussian(rng, static_cast<Eigen::Index>(cfg.input_dim_img), latent, s);
  g.b = gaussian(rng, static_cast<Eigen::Index>(cfg.input_dim_txt), latent, s);
  Eigen::VectorXd mu = gaussian(rng, latent, 1, 1.0);
  const double norm = (g.a * mu).norm();
  mu *= cfg.shift_scale * std::sqrt(static_cast<double>(cfg.input_dim_img)) / norm;
  g.offset_img = g.a * mu;
  g.offset_txt = g.b * mu;
  if (!cfg.shift_on_manifold) {
    g.offset_img = gaussian(rng, g.a.rows(), 1, 1.0);
    g.offset_txt = gaussian(rng, g.b.rows(), 1, 1.0);
    g.offset_img *= cfg.shift_scale * std::sqrt(static_cast<double>(cfg.input_dim_img)) / g.offset_img.norm();
    g.offset_txt *= cfg.shift_scale * std::sqrt(static_cast<double>(cfg.input_dim_txt)) / g.offset_txt.norm();
  }
  return g;
}

PairSet generate_pairs(const SimConfig& cfg, Pool pool) { return generate_pairs(cfg, make_generator(cfg), pool); }

PairSet generate_pairs(const SimConfig& cfg, const Generator& gen, Pool pool) {
  validate(cfg);
  PairSet out;
  out.pool = pool;
  std::size_t n = cfg.n_train;
  switch (pool) {
    case Pool::kMember:
      out.first_id = 0;
      break;
    case Pool::kNonMemberIn:
      out.first_id = cfg.n_train;
      n = cfg.n_nonmember_in;
      break;
    case Pool::kNonMemberShift:
      out.first_id = cfg.n_train + cfg.n_nonmember_in;
      n = cfg.n_nonmember_shift;
      break;
  }
  Rng rng(derive_seed(cfg.seed, {kTagPool, static_cast<std::uint64_t>(pool)}));
  const auto rows = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd z = gaussian(rng, rows, static_cast<Eigen::Index>(cfg.latent_dim), 1.0);
  out.x = z * gen.a.transpose() + gaussian(rng, rows, gen.a.rows(), cfg.noise_std);
  out.y = z * gen.b.transpose() + gaussian(rng, rows, gen.b.rows(), cfg.noise_std);
  if (pool == Pool::kNonMemberShift) {
    out.x.rowwise() += gen.offset_img.transpose();
    out.y.rowwise() += gen.offset_txt.transpose();
  }
  return out;
}

Eigen::MatrixXd Tower::forward(const Eigen::MatrixXd& x) const { return tower_forward(*this, x).u; }

TwoTowerModel::TwoTowerModel(Tower img, Tower txt, double temperature)
    : img_(std::move(img)), txt_(std::move(txt)), temperature_(temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  if (img_.w2.rows() != txt_.w2.rows()) throw ValidationError("towers disagree on embedding dim");
}

TwoTowerModel TwoTowerModel::initialized(std::size_t d_img, std::size_t d_txt, std::size_t hidden, std::size_t embed,
                                         double temperature, std::uint64_t seed) {
  Rng rng(seed);
  Tower img = init_tower(rng, d_img, hidden, embed);
  Tower txt = init_tower(rng, d_txt, hidden, embed);
  return TwoTowerModel(std::move(img), std::move(txt), temperature);
}

EmbeddingVec TwoTowerModel::embed_image(const Eigen::VectorXd& x) const {
  if (x.size() != img_.w1.cols()) throw DomainError("image input has wrong dimension");
  return to_embedding(img_.forward(x.transpose()).row(0));
}

EmbeddingVec TwoTowerModel::embed_text(const Eigen::VectorXd& y) const {
  if (y.size() != txt_.w1.cols()) throw DomainError("text input has wrong dimension");
  return to_embedding(txt_.forward(y.transpose()).row(0));
}

std::size_t TwoTowerModel::parameter_count() const { return tower_size(img_) + tower_size(txt_); }

std::vector<double> TwoTowerModel::flat_parameters() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const Tower* t : {&img_, &txt_}) {
    append(out, t->w1);
    append(out, t->b1);
    append(out, t->w2);
    append(out, t->b2);
  }
  return out;
}

void TwoTowerModel::set_flat_parameters(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw ValidationError("flat parameter vector has wrong length");
  std::size_t pos = 0;
  for (Tower* t : {&img_, &txt_}) {
    take(flat, pos, t->w1);
    take(flat, pos, t->b1);
    take(flat, pos, t->w2);
    take(flat, pos, t->b2);
  }
}

double TwoTowerModel::squared_norm() const { return tower_sq(img_) + tower_sq(txt_); }

LogitLoss symmetric_infonce(const Eigen::MatrixXd& logits) {
  if (logits.rows() != logits.cols() || logits.rows() < 2) {
    throw ValidationError("symmetric InfoNCE needs a square logit matrix of size >= 2");
  }
  const Eigen::Index b = logits.rows();
  // Softmax over rows and over columns. The argmax term is split off so the
  // confident case keeps full precision through log1p.
  Eigen::MatrixXd p_row(b, b), p_col(b, b);
  double loss_row = 0.0, loss_col = 0.0;
  auto nll = [](const Eigen::VectorXd& z, Eigen::Index target, Eigen::VectorXd& p) {
    Eigen::Index am = 0;
    const double m = z.maxCoeff(&am);
    p = (z.array() - m).exp().matrix();
    p(am) = 0.0;
    const double rest = p.sum();
    p(am) = 1.0;
    p /= 1.0 + rest;
    return (m - z(target)) + std::log1p(rest);
  };
  Eigen::VectorXd p;
  for (Eigen::Index i = 0; i < b; ++i) {
    loss_row += nll(logits.row(i).transpose(), i, p);
    p_row.row(i) = p.transpose();
    loss_col += nll(logits.col(i), i, p);
    p_col.col(i) = p;
  }
  const double nb = static_cast<double>(b);
  LogitLoss out;
  out.loss = 0.5 * (loss_row + loss_col) / nb;
  out.dlogits = (p_row + p_col) * (0.5 / nb);
  out.dlogits.diagonal().array() -= 1.0 / nb;
  return out;
}

ContrastiveGrads contrastive_loss_and_grads(const TwoTowerModel& model, const Eigen::MatrixXd& x,
                                            const Eigen::MatrixXd& y, double weight_decay) {
  if (x.rows() != y.rows()) throw ValidationError("image and text batches differ in size");
  if (x.rows() < 2) throw ValidationError("contrastive loss needs a batch of at least 2 pairs");
  const double inv_t = 1.0 / model.temperature();

  const TowerCache ci = tower_forward(model.img(), x);
  const TowerCache ct = tower_forward(model.txt(), y);
  const Eigen::MatrixXd logits = (ci.u * ct.u.transpose()) * inv_t;

  const LogitLoss ll = symmetric_infonce(logits);
  ContrastiveGrads out;
  out.contrastive_loss = ll.loss;
  const Eigen::MatrixXd& dlogits = ll.dlogits;
  const Eigen::MatrixXd du = dlogits * ct.u * inv_t;
  const Eigen::MatrixXd dv = dlogits.transpose() * ci.u * inv_t;
  out.img = tower_backward(model.img(), ci, x, du);
  out.txt = tower_backward(model.txt(), ct, y, dv);

  out.loss = out.contrastive_loss;
  if (weight_decay > 0.0) {
    out.loss += weight_decay * model.squared_norm();
    const double k = 2.0 * weight_decay;
    for (auto [g, p] : {std::pair{&out.img, &model.img()}, std::pair{&out.txt, &model.txt()}}) {
      g->w1 += k * p->w1;
      g->b1 += k * p->b1;
      g->w2 += k * p->w2;
      g->b2 += k * p->b2;
    }
  }
  return out;
}

TargetTraining train_target(const SimConfig& cfg) {
  return train_target(cfg, generate_pairs(cfg, Pool::kMember));
}

TargetTraining train_target(const SimConfig& cfg, const PairSet& members) {
  validate(cfg);
  if (members.x.rows() < 2) throw ValidationError("need at least 2 member pairs to train");
  TargetTraining out;
  out.model = TwoTowerModel::initialized(static_cast<std::size_t>(members.x.cols()),
                                         static_cast<std::size_t>(members.y.cols()), cfg.hidden_dim, cfg.embed_dim,
                                         cfg.temperature, derive_seed(cfg.seed, {kTagInit}));
  Rng rng(derive_seed(cfg.seed, {kTagTrain}));
  const std::size_t n = static_cast<std::size_t>(members.x.rows());
  const auto d_img = members.x.cols();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> perm = rng.permutation(n);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t len = std::min(cfg.batch, n - start);
      if (len < 2) continue;
      Eigen::MatrixXd xb(static_cast<Eigen::Index>(len), d_img);
      Eigen::MatrixXd yb(static_cast<Eigen::Index>(len), members.y.cols());
      for (std::size_t r = 0; r < len; ++r) {
        const auto src = static_cast<Eigen::Index>(perm[start + r]);
        const auto dst = static_cast<Eigen::Index>(r);
        if (cfg.train_augment) {
          const TransformKind kind = kTransformFamily[rng.below(std::size(kTransformFamily))];
          const InputTransform t(kind, static_cast<std::size_t>(d_img), rng.next_u64());
          xb.row(dst) = t.apply(members.x.row(src).transpose(), rng).transpose();
        } else {
          xb.row(dst) = members.x.row(src);
        }
        yb.row(dst) = members.y.row(src);
      }
      const ContrastiveGrads g = contrastive_loss_and_grads(out.model, xb, yb, cfg.weight_decay);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("non-finite contrastive loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batches) + " (lr=" + std::to_string(cfg.lr) +
                            ", weight_decay=" + std::to_string(cfg.weight_decay) + ")");
      }
      sgd_step(out.model.img(), g.img, cfg.lr);
      sgd_step(out.model.txt(), g.txt, cfg.lr);
      loss_sum += g.contrastive_loss;
      ++batches;
    }
    out.epoch_loss.push_back(batches ? loss_sum / static_cast<double>(batches) : 0.0);
  }
  return out;
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kAddNoise: return "add_noise";
    case TransformKind::kMask: return "mask";
    case TransformKind::kRotate2D: return "rotate2d";
    case TransformKind::kScale: return "scale";
    case TransformKind::kShift: return "shift";
    case TransformKind::kFlipSign: return "flip_sign";
  }
  return "?";
}

InputTransform::InputTransform(TransformKind kind, std::size_t dim, std::uint64_t seed) : kind_(kind), dim_(dim) {
  if (dim < 2) throw ValidationError("input transforms need dim >= 2");
  Rng rng(seed);
  const auto fraction_count = [dim](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(dim)));
  };
  switch (kind) {
    case TransformKind::kMask:
      coords_ = first_of_permutation(rng, dim, fraction_count(kMaskFraction));
      break;
    case TransformKind::kFlipSign:
      coords_ = first_of_permutation(rng, dim, fraction_count(kFlipFraction));
      break;
    case TransformKind::kRotate2D: {
      const std::vector<std::size_t> p = first_of_permutation(rng, dim, 2);
      plane_i_ = p[0];
      plane_j_ = p[1];
      break;
    }
    case TransformKind::kShift: {
      shift_ = gaussian(rng, static_cast<Eigen::Index>(dim), 1, 1.0);
      shift_ *= kShiftNorm * std::sqrt(static_cast<double>(dim)) / shift_.norm();
      break;
    }
    case TransformKind::kAddNoise:
    case TransformKind::kScale:
      break;
  }
}

Eigen::VectorXd InputTransform::apply(const Eigen::VectorXd& x, Rng& rng) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DomainError("transform input has wrong dimension");
  Eigen::VectorXd out = x;
  switch (kind_) {
    case TransformKind::kAddNoise:
      for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += kNoiseStd * rng.normal();
      break;
    case TransformKind::kMask:
      for (std::size_t c : coords_) out(static_cast<Eigen::Index>(c)) = 0.0;
      break;
    case TransformKind::kRotate2D: {
      const double th = kRotateDegrees * std::numbers::pi / 180.0;
      const auto i = static_cast<Eigen::Index>(plane_i_), j = static_cast<Eigen::Index>(plane_j_);
      out(i) = std::cos(th) * x(i) - std::sin(th) * x(j);
      out(j) = std::sin(th) * x(i) + std::cos(th) * x(j);
      break;
    }
    case TransformKind::kScale:
      out *= kScaleFactor;
      break;
    case TransformKind::kShift:
      out += shift_;
      break;
    case TransformKind::kFlipSign:
      for (std::size_t c : coords_) out(static_cast<Eigen::Index>(c)) = -x(static_cast<Eigen::Index>(c));
      break;
  }
  return out;
}

Eigen::VectorXd input_transform(const Eigen::VectorXd& x, TransformKind kind, std::uint64_t seed) {
  const InputTransform t(kind, static_cast<std::size_t>(x.size()), seed);
  Rng rng(derive_seed(seed, {0x401}));
  return t.apply(x, rng);
}

FeatureSet export_features(const TwoTowerModel& model, const PairSet& pairs, const SimConfig& cfg, unsigned threads) {
  validate(cfg);
  const std::size_t n = static_cast<std::size_t>(pairs.x.rows());
  const std::size_t d_img = static_cast<std::size_t>(pairs.x.cols());

  FeatureSchema schema;
  schema.d_img = static_cast<std::uint32_t>(model.img().w2.rows());
  schema.d_txt = static_cast<std::uint32_t>(model.txt().w2.rows());
  std::vector<InputTransform> transforms;
  std::vector<std::uint64_t> channel_seeds;
  for (std::size_t k = 0; k < cfg.k_transforms; ++k) {
    const TransformKind kind = kTransformFamily[k % std::size(kTransformFamily)];
    channel_seeds.push_back(derive_seed(cfg.seed, {kTagExport, k}));
    transforms.emplace_back(kind, d_img, channel_seeds.back());
    schema.transform_names.push_back(to_string(kind) + (k < std::size(kTransformFamily) ? "" : "_" + std::to_string(k)));
  }

  const MembershipTag tag = pairs.pool == Pool::kMember ? MembershipTag::kMember : MembershipTag::kNonMember;
  std::vector<FeatureRecord> records(n);
  detail::parallel_ranges(n, threads, [&](std::size_t begin, std::size_t end) {
    if (begin == end) return;
    const auto rows = static_cast<Eigen::Index>(end - begin);
    const auto first = static_cast<Eigen::Index>(begin);
    const Eigen::MatrixXd xs = pairs.x.middleRows(first, rows);
    const Eigen::MatrixXd ui = model.img().forward(xs);
    const Eigen::MatrixXd ut = model.txt().forward(pairs.y.middleRows(first, rows));
    std::vector<Eigen::MatrixXd> uk;
    for (std::size_t k = 0; k < transforms.size(); ++k) {
      Eigen::MatrixXd tx(rows, xs.cols());
      for (Eigen::Index r = 0; r < rows; ++r) {
        // Per-record noise stream, so output is independent of the thread split.
        Rng rng(derive_seed(channel_seeds[k], {pairs.first_id + begin + static_cast<std::size_t>(r)}));
        tx.row(r) = transforms[k].apply(xs.row(r).transpose(), rng).transpose();
      }
      uk.push_back(model.img().forward(tx));
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      FeatureRecord& rec = records[begin + static_cast<std::size_t>(r)];
      rec.id = pairs.first_id + begin + static_cast<std::size_t>(r);
      rec.tag = tag;
      rec.img = to_embedding(ui.row(r));
      rec.txt = to_embedding(ut.row(r));
      for (const Eigen::MatrixXd& m : uk) rec.transformed.push_back(to_embedding(m.row(r)));
    }
  });
  MetaMap meta{{"dataset", "simulator/" + to_string(pairs.pool)},
               {"model", "two_tower_mlp"},
               {"seed", std::to_string(cfg.seed)}};
  return FeatureSet(std::move(schema), std::move(records), std::move(meta));
}

SimulationRun simulate(const SimConfig& cfg, unsigned threads) {
  validate(cfg);
  const Generator gen = make_generator(cfg);
  const PairSet members = generate_pairs(cfg, gen, Pool::kMember);
  const PairSet in = generate_pairs(cfg, gen, Pool::kNonMemberIn);
  const PairSet shift = generate_pairs(cfg, gen, Pool::kNonMemberShift);
  SimulationRun run;
  run.config = cfg;
  run.training = train_target(cfg, members);
  run.members = export_features(run.training.model, members, cfg, threads);
  run.nonmembers_in = export_features(run.training.model, in, cfg, threads);
  run.nonmembers_shift = export_features(run.training.model, shift, cfg, threads);
  return run;
}

}  // namespace miaudit
