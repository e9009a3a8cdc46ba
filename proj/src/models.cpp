#include "nlx/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "nlx/error.hpp"
#include "nlx/rng.hpp"

namespace nlx {

namespace {

// Standardized numerics and one-hot categoricals, fitted on training rows.
class Encoder {
 public:
  Encoder(const FeatureSchema& schema, const std::vector<const Example*>& rows) : schema_(schema) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      Slot s;
      s.offset = width_;
      if (schema[f].is_numeric()) {
        double mean = 0.0;
        for (const Example* r : rows) mean += r->values[f].as_number();
        mean /= static_cast<double>(rows.size());
        double var = 0.0;
        for (const Example* r : rows) var += std::pow(r->values[f].as_number() - mean, 2);
        const double sd = std::sqrt(var / static_cast<double>(rows.size()));
        s.mean = mean;
        s.scale = sd > 0.0 ? sd : 1.0;
        width_ += 1;
      } else {
        for (std::size_t v = 0; v < schema[f].domain().values.size(); ++v) {
          s.levels[schema[f].domain().values[v]] = v;
        }
        width_ += s.levels.size();
      }
      slots_.push_back(std::move(s));
    }
  }

  Eigen::Index width() const noexcept { return static_cast<Eigen::Index>(width_); }

  Eigen::VectorXd encode(const Example& ex) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(width());
    for (std::size_t f = 0; f < slots_.size(); ++f) {
      const Slot& s = slots_[f];
      if (schema_[f].is_numeric()) {
        out(static_cast<Eigen::Index>(s.offset)) = (ex.values[f].as_number() - s.mean) / s.scale;
      } else {
        const auto it = s.levels.find(ex.values[f].as_text());
        if (it != s.levels.end()) out(static_cast<Eigen::Index>(s.offset + it->second)) = 1.0;
      }
    }
    return out;
  }

 private:
  struct Slot {
    std::size_t offset = 0;
    double mean = 0.0;
    double scale = 1.0;
    std::map<std::string, std::size_t> levels;
  };
  FeatureSchema schema_;
  std::vector<Slot> slots_;
  std::size_t width_ = 0;
};

struct TrainingData {
  std::vector<const Example*> rows;
  std::vector<std::size_t> y;
  std::vector<std::string> classes;  // sorted
};

TrainingData training_data(const Dataset& data) {
  std::vector<std::size_t> idx = data.train;
  if (idx.empty()) {
    idx.resize(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  if (idx.empty()) throw Error(ErrorCode::EmptyDataset, "no training rows");
  TrainingData t;
  std::set<std::string> classes;
  for (std::size_t i : idx) classes.insert(data.batch.labels[i]);
  t.classes.assign(classes.begin(), classes.end());
  for (std::size_t i : idx) {
    t.rows.push_back(&data.batch.examples[i]);
    t.y.push_back(static_cast<std::size_t>(
        std::lower_bound(t.classes.begin(), t.classes.end(), data.batch.labels[i]) - t.classes.begin()));
  }
  return t;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::size_t argmax(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<std::size_t>(best);
}

class ConstantClassifier final : public Classifier {
 public:
  ConstantClassifier(FeatureSchema schema, std::string label) : schema_(std::move(schema)), label_(std::move(label)) {}
  std::string predict(const Example&) const override { return label_; }
  const FeatureSchema& schema() const override { return schema_; }

 private:
  FeatureSchema schema_;
  std::string label_;
};

class LogisticClassifier final : public Classifier {
 public:
  LogisticClassifier(const Dataset& data, const TrainingData& t, const TrainOptions& opt)
      : schema_(data.schema), encoder_(data.schema, t.rows), classes_(t.classes) {
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto k = static_cast<Eigen::Index>(classes_.size());
    Eigen::MatrixXd x(n, encoder_.width());
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = encoder_.encode(*t.rows[static_cast<std::size_t>(i)]).transpose();
      y(i, static_cast<Eigen::Index>(t.y[static_cast<std::size_t>(i)])) = 1.0;
    }
    w_ = Eigen::MatrixXd::Zero(encoder_.width(), k);
    b_ = Eigen::RowVectorXd::Zero(k);
    constexpr double kRate = 0.5;
    constexpr double kL2 = 1e-4;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
      const Eigen::MatrixXd logits = (x * w_).rowwise() + b_;
      const Eigen::MatrixXd grad = (softmax_rows(logits) - y) / static_cast<double>(n);
      w_ -= kRate * (x.transpose() * grad + kL2 * w_);
      b_ -= kRate * grad.colwise().sum();
    }
  }

  std::string predict(const Example& ex) const override {
    const Eigen::VectorXd logits = (encoder_.encode(ex).transpose() * w_ + b_).transpose();
    return classes_[argmax(logits)];
  }
  const FeatureSchema& schema() const override { return schema_; }

 private:
  FeatureSchema schema_;
  Encoder encoder_;
  std::vector<std::string> classes_;
  Eigen::MatrixXd w_;
  Eigen::RowVectorXd b_;
};

class MlpClassifier final : public Classifier {
 public:
  MlpClassifier(const Dataset& data, const TrainingData& t, const TrainOptions& opt)
      : schema_(data.schema), encoder_(data.schema, t.rows), classes_(t.classes) {
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto k = static_cast<Eigen::Index>(classes_.size());
    const auto d = encoder_.width();
    const auto h = static_cast<Eigen::Index>(opt.hidden_units);
    Eigen::MatrixXd x(n, d);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      x.row(i) = encoder_.encode(*t.rows[static_cast<std::size_t>(i)]).transpose();
      y(i, static_cast<Eigen::Index>(t.y[static_cast<std::size_t>(i)])) = 1.0;
    }
    Rng rng = Rng::derive(opt.seed, Stream::Init);
    w1_.resize(d, h);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < h; ++j) w1_(i, j) = rng.normal() / std::sqrt(static_cast<double>(d));
    }
    w2_.resize(h, k);
    for (Eigen::Index i = 0; i < h; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) w2_(i, j) = rng.normal() / std::sqrt(static_cast<double>(h));
    }
    b1_ = Eigen::RowVectorXd::Zero(h);
    b2_ = Eigen::RowVectorXd::Zero(k);
    constexpr double kRate = 0.3;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
      const Eigen::MatrixXd hidden = ((x * w1_).rowwise() + b1_).array().tanh().matrix();
      const Eigen::MatrixXd grad_out = (softmax_rows((hidden * w2_).rowwise() + b2_) - y) / static_cast<double>(n);
      const Eigen::MatrixXd grad_hidden =
          ((grad_out * w2_.transpose()).array() * (1.0 - hidden.array().square())).matrix();
      w2_ -= kRate * hidden.transpose() * grad_out;
      b2_ -= kRate * grad_out.colwise().sum();
      w1_ -= kRate * x.transpose() * grad_hidden;
      b1_ -= kRate * grad_hidden.colwise().sum();
    }
  }

  std::string predict(const Example& ex) const override {
    const Eigen::RowVectorXd hidden =
        ((encoder_.encode(ex).transpose() * w1_ + b1_).array().tanh()).matrix();
    const Eigen::VectorXd logits = (hidden * w2_ + b2_).transpose();
    return classes_[argmax(logits)];
  }
  const FeatureSchema& schema() const override { return schema_; }

 private:
  FeatureSchema schema_;
  Encoder encoder_;
  std::vector<std::string> classes_;
  Eigen::MatrixXd w1_, w2_;
  Eigen::RowVectorXd b1_, b2_;
};

class TreeClassifier final : public Classifier {
 public:
  TreeClassifier(const Dataset& data, const TrainingData& t, const TrainOptions& opt)
      : schema_(data.schema), classes_(t.classes) {
    std::vector<std::size_t> all(t.rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    build(t, all, 0, opt.tree_depth);
  }

  std::string predict(const Example& ex) const override {
    std::size_t at = 0;
    while (!nodes_[at].leaf) {
      const Node& n = nodes_[at];
      const Value& v = ex.values[n.feature];
      const bool go_left = schema_[n.feature].is_numeric() ? v.as_number() <= n.threshold
                                                           : v.to_string() == n.category;
      at = go_left ? n.left : n.right;
    }
    return classes_[nodes_[at].label];
  }
  const FeatureSchema& schema() const override { return schema_; }

 private:
  struct Node {
    bool leaf = true;
    std::size_t label = 0;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::string category;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  static constexpr std::size_t kMaxThresholds = 64;

  std::vector<std::size_t> counts(const TrainingData& t, const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> c(classes_.size(), 0);
    for (std::size_t i : idx) ++c[t.y[i]];
    return c;
  }

  static double gini(const std::vector<std::size_t>& c, std::size_t n) {
    if (n == 0) return 0.0;
    double s = 1.0;
    for (std::size_t x : c) {
      const double p = static_cast<double>(x) / static_cast<double>(n);
      s -= p * p;
    }
    return s;
  }

  std::size_t build(const TrainingData& t, const std::vector<std::size_t>& idx, int depth, int max_depth) {
    const std::size_t at = nodes_.size();
    nodes_.emplace_back();
    const auto c = counts(t, idx);
    nodes_[at].label = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
    const double parent = gini(c, idx.size());
    if (depth >= max_depth || parent == 0.0 || idx.size() < 2) return at;

    double best_score = parent - 1e-12;
    std::optional<Node> best;
    auto consider = [&](Node candidate, auto&& goes_left) {
      std::vector<std::size_t> lc(classes_.size(), 0), rc(classes_.size(), 0);
      std::size_t nl = 0;
      for (std::size_t i : idx) {
        if (goes_left(*t.rows[i])) {
          ++lc[t.y[i]];
          ++nl;
        } else {
          ++rc[t.y[i]];
        }
      }
      const std::size_t nr = idx.size() - nl;
      if (nl == 0 || nr == 0) return;
      const double score = (static_cast<double>(nl) * gini(lc, nl) + static_cast<double>(nr) * gini(rc, nr)) /
                           static_cast<double>(idx.size());
      if (score < best_score) {
        best_score = score;
        best = std::move(candidate);
      }
    };

    for (std::size_t f = 0; f < schema_.size(); ++f) {
      if (schema_[f].is_numeric()) {
        std::set<double> distinct;
        for (std::size_t i : idx) distinct.insert(t.rows[i]->values[f].as_number());
        std::vector<double> sorted(distinct.begin(), distinct.end());
        if (sorted.size() < 2) continue;
        const std::size_t gaps = sorted.size() - 1;
        const std::size_t step = std::max<std::size_t>(1, gaps / kMaxThresholds);
        for (std::size_t g = 0; g < gaps; g += step) {
          Node cand;
          cand.leaf = false;
          cand.feature = f;
          cand.threshold = (sorted[g] + sorted[g + 1]) / 2.0;
          const double thr = cand.threshold;
          consider(std::move(cand), [&](const Example& ex) { return ex.values[f].as_number() <= thr; });
        }
      } else {
        for (const auto& v : schema_[f].domain().values) {
          Node cand;
          cand.leaf = false;
          cand.feature = f;
          cand.category = v;
          consider(std::move(cand), [&](const Example& ex) { return ex.values[f].to_string() == v; });
        }
      }
    }
    if (!best) return at;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      const Value& v = t.rows[i]->values[best->feature];
      const bool l = schema_[best->feature].is_numeric() ? v.as_number() <= best->threshold
                                                         : v.to_string() == best->category;
      (l ? left : right).push_back(i);
    }
    const std::size_t label = nodes_[at].label;
    const std::size_t l_at = build(t, left, depth + 1, max_depth);
    const std::size_t r_at = build(t, right, depth + 1, max_depth);
    Node& n = nodes_[at];
    n = *best;
    n.label = label;
    n.left = l_at;
    n.right = r_at;
    return at;
  }

  FeatureSchema schema_;
  std::vector<std::string> classes_;
  std::vector<Node> nodes_;
};

}  // namespace

ClassifierKind classifier_kind_from_name(std::string_view name) {
  if (name == "logistic" || name == "logreg") return ClassifierKind::Logistic;
  if (name == "tree" || name == "dt") return ClassifierKind::Tree;
  if (name == "mlp" || name == "nn") return ClassifierKind::Mlp;
  throw Error(ErrorCode::UnsupportedKind, "unsupported classifier kind '" + std::string(name) + "'");
}

std::string_view classifier_kind_name(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::Logistic: return "logistic";
    case ClassifierKind::Tree: return "tree";
    case ClassifierKind::Mlp: return "mlp";
  }
  return "tree";
}

std::shared_ptr<const Classifier> train_classifier(ClassifierKind kind, const Dataset& data,
                                                   const TrainOptions& options) {
  const TrainingData t = training_data(data);
  if (t.classes.size() == 1) return std::make_shared<ConstantClassifier>(data.schema, t.classes.front());
  switch (kind) {
    case ClassifierKind::Logistic: return std::make_shared<LogisticClassifier>(data, t, options);
    case ClassifierKind::Tree: return std::make_shared<TreeClassifier>(data, t, options);
    case ClassifierKind::Mlp: return std::make_shared<MlpClassifier>(data, t, options);
  }
  throw Error(ErrorCode::UnsupportedKind, "unsupported classifier kind");
}

double accuracy(const Classifier& c, const LabeledBatch& batch) {
  if (batch.examples.empty()) throw Error(ErrorCode::EmptyBatch, "batch is empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) hits += c.predict(batch.examples[i]) == batch.labels[i];
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

}  // namespace nlx
