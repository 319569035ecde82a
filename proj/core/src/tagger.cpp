#include "rucca/tagger.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <random>

#include "rucca/error.hpp"

namespace rucca {

using Eigen::Index;
using Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Oracle

OracleTagger::OracleTagger(std::vector<Passage> gold) {
  for (const Passage& passage : gold) {
    const PassageIndex index(passage);
    for (NodeId node : non_terminals(passage)) {
      const auto& y = index.yield(node);
      if (y.empty() || y.back() - y.front() + 1 != y.size()) continue;
      Encoding enc = encode(index, node);
      if (!enc.representable()) continue;
      const Edge* parent = index.primary_parent(node);
      const MaskSymbol symbol = parent ? MaskSymbol::of(parent->category) : MaskSymbol::root();
      Key key{passage.passage_id, y.front(), y.back() + 1, symbol.index()};
      entries_.emplace(std::move(key), Entry{std::move(enc.labels)});
    }
  }
}

TagDistribution OracleTagger::predict(const MaskedExample& example) const {
  const std::size_t n = example.mask.size();
  std::size_t first = n;
  std::size_t last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!example.mask[i].is_outside()) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first < n) {
    const auto it = entries_.find(Key{example.passage_id, first, last + 1, example.mask[first].index()});
    if (it != entries_.end() && it->second.labels.size() == n) return one_hot(it->second.labels);
  }
  ++misses_;
  return one_hot(std::vector<BioLabel>(n, BioLabel::outside()));
}

TagDistribution oracle_predict(const Passage& gold, NodeId focus) {
  const PassageIndex index(gold);
  Encoding enc = encode(index, focus);
  if (!enc.representable()) {
    throw ValidationError("node " + to_string(focus) + " is not BIO-representable: " + enc.failure);
  }
  return one_hot(enc.labels);
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

void append_direction(std::vector<MatrixXd*>& out, GruDirectionParams& d) {
  for (MatrixXd* m : {&d.w_z, &d.w_r, &d.w_n, &d.u_z, &d.u_r, &d.u_n, &d.b_z, &d.b_r, &d.b_n}) out.push_back(m);
}

constexpr std::array<const char*, 9> kDirectionTensorNames = {"w_z", "w_r", "w_n", "u_z", "u_r",
                                                              "u_n", "b_z", "b_r", "b_n"};

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  /// Uniform on [-limit, limit), bit-reproducible across standard libraries.
  double operator()(double limit) {
    const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * limit;
  }

 private:
  std::mt19937_64 rng_;
};

MatrixXd xavier(Uniform& draw, Index rows, Index cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = draw(limit);
  }
  return m;
}

GruDirectionParams init_direction(Uniform& draw, Index input, Index hidden) {
  GruDirectionParams d;
  d.w_z = xavier(draw, hidden, input);
  d.w_r = xavier(draw, hidden, input);
  d.w_n = xavier(draw, hidden, input);
  d.u_z = xavier(draw, hidden, hidden);
  d.u_r = xavier(draw, hidden, hidden);
  d.u_n = xavier(draw, hidden, hidden);
  d.b_z = MatrixXd::Zero(hidden, 1);
  d.b_r = MatrixXd::Zero(hidden, 1);
  d.b_n = MatrixXd::Zero(hidden, 1);
  return d;
}

}  // namespace

std::size_t GruTaggerParams::input_dim() const {
  std::size_t d = WordEmbeddingTable::kDim + 1;
  for (auto dim : embedding_dims) d += dim;
  return d;
}

std::vector<MatrixXd*> GruTaggerParams::tensors() {
  std::vector<MatrixXd*> out;
  for (auto& e : embeddings) out.push_back(&e);
  out.push_back(&w_in);
  out.push_back(&b_in);
  for (auto& layer : layers) {
    append_direction(out, layer.forward);
    append_direction(out, layer.backward);
    out.push_back(&layer.w_gate);
    out.push_back(&layer.b_gate);
  }
  for (MatrixXd* m : {&w_bio, &b_bio, &w_aux, &b_aux}) out.push_back(m);
  return out;
}

std::vector<const MatrixXd*> GruTaggerParams::tensors() const {
  auto mutable_view = const_cast<GruTaggerParams*>(this)->tensors();
  return {mutable_view.begin(), mutable_view.end()};
}

std::vector<std::string> GruTaggerParams::tensor_names() const {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < embeddings.size(); ++k) names.push_back("embedding/" + std::to_string(k));
  names.emplace_back("input/w");
  names.emplace_back("input/b");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + "/";
    for (const char* dir : {"forward/", "backward/"}) {
      for (const char* name : kDirectionTensorNames) names.push_back(prefix + dir + name);
    }
    names.push_back(prefix + "gate/w");
    names.push_back(prefix + "gate/b");
  }
  for (const char* name : {"bio/w", "bio/b", "aux/w", "aux/b"}) names.emplace_back(name);
  return names;
}

std::size_t GruTaggerParams::parameter_count() const {
  std::size_t n = 0;
  for (const MatrixXd* m : tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

GruTaggerParams GruTaggerParams::zeros_like() const {
  GruTaggerParams z = *this;
  for (MatrixXd* m : z.tensors()) m->setZero();
  return z;
}

void GruTaggerParams::check() const {
  const auto h = static_cast<Index>(hidden);
  const Index m = 2 * h;
  auto expect = [](const MatrixXd& t, Index rows, Index cols, const std::string& what) {
    if (t.rows() != rows || t.cols() != cols) throw NumericError("shape mismatch in " + what);
  };
  if (embeddings.size() != embedding_dims.size()) throw NumericError("embedding table count mismatch");
  for (std::size_t k = 0; k < embeddings.size(); ++k) {
    if (embeddings[k].rows() != static_cast<Index>(embedding_dims[k])) throw NumericError("embedding dim mismatch");
  }
  expect(w_in, m, static_cast<Index>(input_dim()), "input/w");
  expect(b_in, m, 1, "input/b");
  for (const auto& layer : layers) {
    for (const auto* d : {&layer.forward, &layer.backward}) {
      for (const auto* w : {&d->w_z, &d->w_r, &d->w_n}) expect(*w, h, m, "gru input weight");
      for (const auto* u : {&d->u_z, &d->u_r, &d->u_n}) expect(*u, h, h, "gru recurrent weight");
      for (const auto* b : {&d->b_z, &d->b_r, &d->b_n}) expect(*b, h, 1, "gru bias");
    }
    expect(layer.w_gate, m, m, "gate/w");
    expect(layer.b_gate, m, 1, "gate/b");
  }
  expect(w_bio, static_cast<Index>(BioLabel::kCount), m, "bio/w");
  expect(b_bio, static_cast<Index>(BioLabel::kCount), 1, "bio/b");
  if (w_aux.cols() != m || b_aux.rows() != w_aux.rows() || b_aux.cols() != 1) throw NumericError("shape mismatch in aux head");
  const auto names = tensor_names();
  const auto ts = tensors();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!ts[i]->allFinite()) throw NumericError("non-finite value in " + names[i]);
  }
}

bool operator==(const GruTaggerParams& a, const GruTaggerParams& b) {
  if (a.hidden != b.hidden || a.embedding_dims != b.embedding_dims || a.layers.size() != b.layers.size() ||
      a.embeddings.size() != b.embeddings.size()) {
    return false;
  }
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i]->rows() != tb[i]->rows() || ta[i]->cols() != tb[i]->cols()) return false;
    // Bitwise equality: the determinism contract is byte-level.
    if (std::memcmp(ta[i]->data(), tb[i]->data(), sizeof(double) * static_cast<std::size_t>(ta[i]->size())) != 0) {
      return false;
    }
  }
  return true;
}

GruTaggerParams init_params(const FeatureVocabularies& vocab, std::size_t hidden, std::uint64_t seed,
                            std::size_t layers) {
  if (hidden == 0 || layers == 0) throw ConfigError("hidden width and layer count must be positive");
  Uniform draw(seed);
  GruTaggerParams p;
  p.hidden = hidden;
  const auto h = static_cast<Index>(hidden);
  const Index m = 2 * h;
  for (const auto& table : vocab.tables) {
    p.embedding_dims.push_back(table.dim);
    MatrixXd e(static_cast<Index>(table.dim), static_cast<Index>(table.symbols.size()));
    for (Index c = 0; c < e.cols(); ++c) {
      for (Index r = 0; r < e.rows(); ++r) e(r, c) = draw(0.1);
    }
    p.embeddings.push_back(std::move(e));
  }
  p.w_in = xavier(draw, m, static_cast<Index>(p.input_dim()));
  p.b_in = MatrixXd::Zero(m, 1);
  for (std::size_t l = 0; l < layers; ++l) {
    HighwayLayerParams layer;
    layer.forward = init_direction(draw, m, h);
    layer.backward = init_direction(draw, m, h);
    layer.w_gate = xavier(draw, m, m);
    layer.b_gate = MatrixXd::Constant(m, 1, -1.0);
    p.layers.push_back(std::move(layer));
  }
  p.w_bio = xavier(draw, static_cast<Index>(BioLabel::kCount), m);
  p.b_bio = MatrixXd::Zero(static_cast<Index>(BioLabel::kCount), 1);
  const auto aux = static_cast<Index>(std::max<std::size_t>(vocab.aux_labels.size(), 1));
  p.w_aux = xavier(draw, aux, m);
  p.b_aux = MatrixXd::Zero(aux, 1);
  return p;
}

TaggerTargets make_targets(const MaskedExample& example, const FeatureVocabularies& vocab) {
  if (!example.target_bio || !example.target_aux) throw ConfigError("example has no training targets");
  TaggerTargets t;
  for (auto l : *example.target_bio) t.bio.push_back(static_cast<std::int32_t>(l.index()));
  for (const auto& a : *example.target_aux) t.aux.push_back(vocab.aux_index(a));
  return t;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

MatrixXd sigmoid(const MatrixXd& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

MatrixXd softmax_columns(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    p.col(c) = (logits.col(c).array() - mx).exp().matrix();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

struct GruTrace {
  MatrixXd z, r, n, h, h_prev;
};

struct LayerTrace {
  MatrixXd input, gate, hidden, output;
  GruTrace fwd, bwd;
};

struct ForwardTrace {
  MatrixXd x;
  std::vector<LayerTrace> layers;
  MatrixXd p_bio, p_aux;
};

GruTrace run_gru(const GruDirectionParams& p, const MatrixXd& input, bool reverse) {
  const Index T = input.cols();
  const Index h = p.u_z.rows();
  GruTrace tr;
  const MatrixXd xz = (p.w_z * input).colwise() + p.b_z.col(0);
  const MatrixXd xr = (p.w_r * input).colwise() + p.b_r.col(0);
  const MatrixXd xn = (p.w_n * input).colwise() + p.b_n.col(0);
  tr.z.resize(h, T);
  tr.r.resize(h, T);
  tr.n.resize(h, T);
  tr.h.resize(h, T);
  tr.h_prev.resize(h, T);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(h);
  for (Index step = 0; step < T; ++step) {
    const Index t = reverse ? T - 1 - step : step;
    const Eigen::VectorXd z = sigmoid(xz.col(t) + p.u_z * prev);
    const Eigen::VectorXd r = sigmoid(xr.col(t) + p.u_r * prev);
    const Eigen::VectorXd n = (xn.col(t) + p.u_n * r.cwiseProduct(prev)).array().tanh().matrix();
    tr.h_prev.col(t) = prev;
    tr.z.col(t) = z;
    tr.r.col(t) = r;
    tr.n.col(t) = n;
    prev = (1.0 - z.array()) * n.array() + z.array() * prev.array();
    tr.h.col(t) = prev;
  }
  return tr;
}

/// Accumulates parameter gradients into `g`; returns d(loss)/d(input).
MatrixXd backprop_gru(const GruDirectionParams& p, const MatrixXd& input, const GruTrace& tr, const MatrixXd& d_out,
                      bool reverse, GruDirectionParams& g) {
  const Index T = input.cols();
  const Index h = p.u_z.rows();
  MatrixXd dz_pre(h, T), dr_pre(h, T), dn_pre(h, T);
  Eigen::VectorXd carry = Eigen::VectorXd::Zero(h);
  for (Index step = T - 1; step >= 0; --step) {
    const Index t = reverse ? T - 1 - step : step;
    const Eigen::VectorXd dh = d_out.col(t) + carry;
    const auto z = tr.z.col(t).array();
    const auto r = tr.r.col(t).array();
    const auto n = tr.n.col(t).array();
    const auto hp = tr.h_prev.col(t).array();

    const Eigen::VectorXd dn = (dh.array() * (1.0 - z)).matrix();
    const Eigen::VectorXd dz = (dh.array() * (hp - n)).matrix();
    Eigen::VectorXd dhp = (dh.array() * z).matrix();

    const Eigen::VectorXd dnp = (dn.array() * (1.0 - n * n)).matrix();
    const Eigen::VectorXd dzp = (dz.array() * z * (1.0 - z)).matrix();
    const Eigen::VectorXd rh = (r * hp).matrix();
    g.u_n.noalias() += dnp * rh.transpose();
    const Eigen::VectorXd d_rh = p.u_n.transpose() * dnp;
    const Eigen::VectorXd dr = (d_rh.array() * hp).matrix();
    dhp.array() += d_rh.array() * r;
    const Eigen::VectorXd drp = (dr.array() * r * (1.0 - r)).matrix();

    g.u_z.noalias() += dzp * tr.h_prev.col(t).transpose();
    g.u_r.noalias() += drp * tr.h_prev.col(t).transpose();
    dhp.noalias() += p.u_z.transpose() * dzp;
    dhp.noalias() += p.u_r.transpose() * drp;

    dz_pre.col(t) = dzp;
    dr_pre.col(t) = drp;
    dn_pre.col(t) = dnp;
    carry = dhp;
  }
  g.w_z.noalias() += dz_pre * input.transpose();
  g.w_r.noalias() += dr_pre * input.transpose();
  g.w_n.noalias() += dn_pre * input.transpose();
  g.b_z += dz_pre.rowwise().sum();
  g.b_r += dr_pre.rowwise().sum();
  g.b_n += dn_pre.rowwise().sum();
  MatrixXd d_input = p.w_z.transpose() * dz_pre;
  d_input.noalias() += p.w_r.transpose() * dr_pre;
  d_input.noalias() += p.w_n.transpose() * dn_pre;
  return d_input;
}

MatrixXd assemble_input(const GruTaggerParams& params, const FeaturizedExample& ex) {
  const auto T = static_cast<Index>(ex.size());
  if (ex.words.cols() != T || ex.categorical.size() != params.embeddings.size()) {
    throw NumericError("featurized example does not match the model's feature tables");
  }
  MatrixXd x(static_cast<Index>(params.input_dim()), T);
  const auto word_dim = static_cast<Index>(WordEmbeddingTable::kDim);
  x.topRows(word_dim) = ex.words;
  Index offset = word_dim;
  for (std::size_t k = 0; k < params.embeddings.size(); ++k) {
    const MatrixXd& table = params.embeddings[k];
    const Index dim = table.rows();
    for (Index t = 0; t < T; ++t) {
      const auto idx = ex.categorical[k][static_cast<std::size_t>(t)];
      if (idx < 0 || idx >= table.cols()) throw NumericError("feature index out of range");
      x.block(offset, t, dim, 1) = table.col(idx);
    }
    offset += dim;
  }
  for (Index t = 0; t < T; ++t) x(offset, t) = ex.mwe[static_cast<std::size_t>(t)];
  return x;
}

ForwardTrace run_forward(const GruTaggerParams& params, const FeaturizedExample& ex) {
  ForwardTrace tr;
  tr.x = assemble_input(params, ex);
  const auto m = static_cast<Index>(2 * params.hidden);
  if (params.w_in.rows() != m || params.w_in.cols() != tr.x.rows() || params.w_bio.cols() != m ||
      params.w_aux.cols() != m) {
    throw NumericError("parameter shapes do not match the input or hidden size");
  }
  MatrixXd a = (params.w_in * tr.x).colwise() + params.b_in.col(0);
  const auto h = static_cast<Index>(params.hidden);
  for (const auto& layer : params.layers) {
    LayerTrace lt;
    lt.input = a;
    lt.fwd = run_gru(layer.forward, a, false);
    lt.bwd = run_gru(layer.backward, a, true);
    lt.hidden.resize(2 * h, a.cols());
    lt.hidden.topRows(h) = lt.fwd.h;
    lt.hidden.bottomRows(h) = lt.bwd.h;
    lt.gate = sigmoid((layer.w_gate * a).colwise() + layer.b_gate.col(0));
    lt.output = (lt.gate.array() * lt.hidden.array() + (1.0 - lt.gate.array()) * a.array()).matrix();
    a = lt.output;
    tr.layers.push_back(std::move(lt));
  }
  tr.p_bio = softmax_columns((params.w_bio * a).colwise() + params.b_bio.col(0));
  tr.p_aux = softmax_columns((params.w_aux * a).colwise() + params.b_aux.col(0));
  if (!tr.p_bio.allFinite() || !tr.p_aux.allFinite()) throw NumericError("non-finite activation in forward pass");
  return tr;
}

const MatrixXd& top_output(const ForwardTrace& tr) { return tr.layers.empty() ? tr.x : tr.layers.back().output; }

void check_targets(const TaggerTargets& targets, std::size_t n, const GruTaggerParams& params) {
  if (targets.bio.size() != n || targets.aux.size() != n) throw ConfigError("target length does not match example");
  for (auto b : targets.bio) {
    if (b < 0 || static_cast<std::size_t>(b) >= BioLabel::kCount) throw ConfigError("BIO target out of range");
  }
  for (auto a : targets.aux) {
    if (a < 0 || a >= params.w_aux.rows()) throw ConfigError("aux target out of range");
  }
}

}  // namespace

TagDistribution forward(const GruTaggerParams& params, const FeaturizedExample& example) {
  const ForwardTrace tr = run_forward(params, example);
  TagDistribution dist;
  dist.bio = tr.p_bio.transpose();
  dist.aux = tr.p_aux.transpose();
  return dist;
}

double cross_entropy(const TagDistribution& dist, const TaggerTargets& targets, double aux_weight) {
  const auto n = static_cast<std::size_t>(dist.bio.rows());
  if (targets.bio.size() != n || targets.aux.size() != n) throw ConfigError("target length does not match distribution");
  if (n == 0) return 0.0;
  auto clipped = [](double p) { return std::clamp(p, 1e-9, 1.0 - 1e-9); };
  double bio = 0.0;
  double aux = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = static_cast<Index>(t);
    bio -= std::log(clipped(dist.bio(row, targets.bio[t])));
    if (aux_weight != 0.0) aux -= std::log(clipped(dist.aux(row, targets.aux[t])));
  }
  return bio / static_cast<double>(n) + aux_weight * aux / static_cast<double>(n);
}

double loss(const GruTaggerParams& params, const FeaturizedExample& example, const TaggerTargets& targets,
            double aux_weight) {
  check_targets(targets, example.size(), params);
  return cross_entropy(forward(params, example), targets, aux_weight);
}

LossGradient gradients(const GruTaggerParams& params, const FeaturizedExample& example, const TaggerTargets& targets,
                       double aux_weight) {
  check_targets(targets, example.size(), params);
  const ForwardTrace tr = run_forward(params, example);
  LossGradient out;
  out.gradient = params.zeros_like();
  GruTaggerParams& g = out.gradient;
  {
    TagDistribution dist{tr.p_bio.transpose(), tr.p_aux.transpose()};
    out.loss = cross_entropy(dist, targets, aux_weight);
  }
  const Index T = tr.x.cols();
  if (T == 0) return out;
  const double inv_t = 1.0 / static_cast<double>(T);
  const MatrixXd& top = top_output(tr);

  MatrixXd d_bio = tr.p_bio;
  for (Index t = 0; t < T; ++t) d_bio(targets.bio[static_cast<std::size_t>(t)], t) -= 1.0;
  d_bio *= inv_t;
  g.w_bio.noalias() += d_bio * top.transpose();
  g.b_bio += d_bio.rowwise().sum();
  MatrixXd d_a = params.w_bio.transpose() * d_bio;

  if (aux_weight != 0.0) {
    MatrixXd d_aux = tr.p_aux;
    for (Index t = 0; t < T; ++t) d_aux(targets.aux[static_cast<std::size_t>(t)], t) -= 1.0;
    d_aux *= aux_weight * inv_t;
    g.w_aux.noalias() += d_aux * top.transpose();
    g.b_aux += d_aux.rowwise().sum();
    d_a.noalias() += params.w_aux.transpose() * d_aux;
  }

  const auto h = static_cast<Index>(params.hidden);
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    const LayerTrace& lt = tr.layers[l];
    auto& gl = g.layers[l];
    const MatrixXd d_hidden = (d_a.array() * lt.gate.array()).matrix();
    const MatrixXd d_gate_pre =
        (d_a.array() * (lt.hidden.array() - lt.input.array()) * lt.gate.array() * (1.0 - lt.gate.array())).matrix();
    MatrixXd d_input = (d_a.array() * (1.0 - lt.gate.array())).matrix();
    gl.w_gate.noalias() += d_gate_pre * lt.input.transpose();
    gl.b_gate += d_gate_pre.rowwise().sum();
    d_input.noalias() += layer.w_gate.transpose() * d_gate_pre;
    d_input += backprop_gru(layer.forward, lt.input, lt.fwd, d_hidden.topRows(h), false, gl.forward);
    d_input += backprop_gru(layer.backward, lt.input, lt.bwd, d_hidden.bottomRows(h), true, gl.backward);
    d_a = std::move(d_input);
  }

  g.w_in.noalias() += d_a * tr.x.transpose();
  g.b_in += d_a.rowwise().sum();
  const MatrixXd d_x = params.w_in.transpose() * d_a;
  Index offset = static_cast<Index>(WordEmbeddingTable::kDim);
  for (std::size_t k = 0; k < params.embeddings.size(); ++k) {
    const Index dim = params.embeddings[k].rows();
    for (Index t = 0; t < T; ++t) {
      g.embeddings[k].col(example.categorical[k][static_cast<std::size_t>(t)]) += d_x.block(offset, t, dim, 1);
    }
    offset += dim;
  }
  return out;
}

FeaturizedExample GruTagger::featurize(const MaskedExample& example) const {
  const ExpressionLexicon* lex = example.tokens.empty() ? nullptr : lexicons_->find(example.tokens.front().language);
  return rucca::featurize(example, *vocab_, *embeddings_, lex);
}

TagDistribution GruTagger::predict(const MaskedExample& example) const {
  return forward(*params_, featurize(example));
}

}  // namespace rucca
