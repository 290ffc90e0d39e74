// Copyright 2026 The ftpl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ftpl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ftpl {

class LossImpl {
 public:
  virtual ~LossImpl() = default;
  virtual double eval(const Vector& x) const = 0;
  virtual double lipschitz() const = 0;
  virtual std::string descriptor() const = 0;
  virtual bool piecewise_linear() const { return false; }
  virtual void append_pwl_deltas(double /*weight*/, PwlProfile& /*out*/) const {
    throw std::logic_error("loss is not 1-d piecewise linear");
  }
};

namespace {

std::string format_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

class ZeroLoss final : public LossImpl {
 public:
  double eval(const Vector&) const override { return 0.0; }
  double lipschitz() const override { return 0.0; }
  std::string descriptor() const override { return "zero"; }
  bool piecewise_linear() const override { return true; }
  void append_pwl_deltas(double, PwlProfile&) const override {}
};

class HingeLoss final : public LossImpl {
 public:
  HingeLoss(Vector center, double diameter)
      : center_(std::move(center)), diameter_(diameter) {
    if (!(diameter_ > 0)) {
      throw std::invalid_argument("hinge: diameter must be positive");
    }
  }

  double eval(const Vector& x) const override {
    return std::max(0.0, diameter_ / 2.0 - l1_distance(x, center_));
  }
  double lipschitz() const override { return 1.0; }
  std::string descriptor() const override {
    std::ostringstream os;
    os << "hinge(c=";
    for (Eigen::Index i = 0; i < center_.size(); ++i) {
      os << (i ? ";" : "") << center_[i];
    }
    os << ",D=" << diameter_ << ")";
    return os.str();
  }
  bool piecewise_linear() const override { return center_.size() == 1; }
  void append_pwl_deltas(double w, PwlProfile& out) const override {
    const double a = center_[0];
    const double r = diameter_ / 2.0;
    out.deltas.emplace_back(a - r, w);
    out.deltas.emplace_back(a, -2.0 * w);
    out.deltas.emplace_back(a + r, w);
  }

 private:
  Vector center_;
  double diameter_;
};

class LinearLoss final : public LossImpl {
 public:
  LinearLoss(Vector coeffs, double offset)
      : coeffs_(std::move(coeffs)), offset_(offset) {}

  double eval(const Vector& x) const override { return coeffs_.dot(x) + offset_; }
  double lipschitz() const override { return coeffs_.cwiseAbs().maxCoeff(); }
  std::string descriptor() const override {
    return "linear(|c|=" + format_num(coeffs_.cwiseAbs().maxCoeff()) + ")";
  }
  bool piecewise_linear() const override { return coeffs_.size() == 1; }
  void append_pwl_deltas(double w, PwlProfile& out) const override {
    out.base_slope += w * coeffs_[0];
  }

 private:
  Vector coeffs_;
  double offset_;
};

class SinusoidLoss final : public LossImpl {
 public:
  SinusoidLoss(double lip, double freq, Vector phases)
      : lip_(lip), freq_(freq), phases_(std::move(phases)) {
    if (!(lip_ > 0) || !(freq_ > 0)) {
      throw std::invalid_argument("sinusoid: lipschitz and freq must be positive");
    }
  }

  double eval(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      s += std::sin(freq_ * x[i] + phases_[i]);
    }
    return lip_ / freq_ * s;
  }
  double lipschitz() const override { return lip_; }
  std::string descriptor() const override {
    return "sinusoid(L=" + format_num(lip_) + ",freq=" + format_num(freq_) + ")";
  }

 private:
  double lip_;
  double freq_;
  Vector phases_;
};

class PwlLoss final : public LossImpl {
 public:
  PwlLoss(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() < 2 || xs_.size() != ys_.size()) {
      throw std::invalid_argument("pwl: need matching xs/ys with >= 2 knots");
    }
    if (std::adjacent_find(xs_.begin(), xs_.end(), [](double a, double b) {
          return a >= b;
        }) != xs_.end()) {
      throw std::invalid_argument("pwl: xs must be strictly increasing");
    }
    slopes_.resize(xs_.size() - 1);
    for (std::size_t j = 0; j + 1 < xs_.size(); ++j) {
      slopes_[j] = (ys_[j + 1] - ys_[j]) / (xs_[j + 1] - xs_[j]);
    }
  }

  double eval(const Vector& x) const override {
    const double v = x[0];
    std::size_t j;
    if (v <= xs_.front()) {
      j = 0;
    } else if (v >= xs_.back()) {
      j = slopes_.size() - 1;
    } else {
      j = static_cast<std::size_t>(
              std::upper_bound(xs_.begin(), xs_.end(), v) - xs_.begin()) - 1;
    }
    return ys_[j] + slopes_[j] * (v - xs_[j]);
  }
  double lipschitz() const override {
    double m = 0.0;
    for (double s : slopes_) m = std::max(m, std::abs(s));
    return m;
  }
  std::string descriptor() const override {
    return "pwl(knots=" + std::to_string(xs_.size()) + ")";
  }
  bool piecewise_linear() const override { return true; }
  void append_pwl_deltas(double w, PwlProfile& out) const override {
    out.base_slope += w * slopes_.front();
    for (std::size_t j = 1; j < slopes_.size(); ++j) {
      out.deltas.emplace_back(xs_[j], w * (slopes_[j] - slopes_[j - 1]));
    }
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> slopes_;
};

class ScaledSumLoss final : public LossImpl {
 public:
  explicit ScaledSumLoss(std::vector<std::pair<double, LossFunction>> terms)
      : terms_(std::move(terms)) {}

  double eval(const Vector& x) const override {
    double s = 0.0;
    for (const auto& [w, f] : terms_) s += w * f(x);
    return s;
  }
  double lipschitz() const override {
    double s = 0.0;
    for (const auto& [w, f] : terms_) s += std::abs(w) * f.lipschitz();
    return s;
  }
  std::string descriptor() const override {
    return "sum(n=" + std::to_string(terms_.size()) + ")";
  }
  bool piecewise_linear() const override {
    for (const auto& [w, f] : terms_) {
      if (!f.piecewise_linear()) return false;
    }
    return true;
  }
  void append_pwl_deltas(double w, PwlProfile& out) const override {
    for (const auto& [wi, f] : terms_) f.append_pwl_deltas(w * wi, out);
  }

 private:
  std::vector<std::pair<double, LossFunction>> terms_;
};

class DeclaredLipLoss final : public LossImpl {
 public:
  DeclaredLipLoss(LossFunction inner, double lip)
      : inner_(std::move(inner)), lip_(lip) {
    if (lip_ < 0) throw std::invalid_argument("with_lipschitz: constant must be >= 0");
  }

  double eval(const Vector& x) const override { return inner_(x); }
  double lipschitz() const override { return lip_; }
  std::string descriptor() const override { return inner_.descriptor(); }
  bool piecewise_linear() const override { return inner_.piecewise_linear(); }
  void append_pwl_deltas(double w, PwlProfile& out) const override {
    inner_.append_pwl_deltas(w, out);
  }

 private:
  LossFunction inner_;
  double lip_;
};

class OpaqueLoss final : public LossImpl {
 public:
  OpaqueLoss(std::function<double(const Vector&)> eval, double lip,
             std::string descr)
      : eval_(std::move(eval)), lip_(lip), descr_(std::move(descr)) {
    if (lip_ < 0) throw std::invalid_argument("opaque: lipschitz must be >= 0");
  }

  double eval(const Vector& x) const override { return eval_(x); }
  double lipschitz() const override { return lip_; }
  std::string descriptor() const override { return descr_; }

 private:
  std::function<double(const Vector&)> eval_;
  double lip_;
  std::string descr_;
};

}  // namespace

LossFunction::LossFunction() : impl_(std::make_shared<ZeroLoss>()) {}
LossFunction::LossFunction(std::shared_ptr<const LossImpl> impl)
    : impl_(std::move(impl)) {}

double LossFunction::operator()(const Vector& x) const { return impl_->eval(x); }
double LossFunction::lipschitz() const { return impl_->lipschitz(); }
std::string LossFunction::descriptor() const { return impl_->descriptor(); }
bool LossFunction::piecewise_linear() const { return impl_->piecewise_linear(); }
void LossFunction::append_pwl_deltas(double weight, PwlProfile& out) const {
  impl_->append_pwl_deltas(weight, out);
}

LossFunction LossFunction::zero() { return LossFunction(std::make_shared<ZeroLoss>()); }
LossFunction LossFunction::hinge(Vector center, double diameter) {
  return LossFunction(std::make_shared<HingeLoss>(std::move(center), diameter));
}
LossFunction LossFunction::linear(Vector coeffs, double offset) {
  return LossFunction(std::make_shared<LinearLoss>(std::move(coeffs), offset));
}
LossFunction LossFunction::sinusoid(double lipschitz, double freq, Vector phases) {
  return LossFunction(std::make_shared<SinusoidLoss>(lipschitz, freq, std::move(phases)));
}
LossFunction LossFunction::pwl(std::vector<double> xs, std::vector<double> ys) {
  return LossFunction(std::make_shared<PwlLoss>(std::move(xs), std::move(ys)));
}
LossFunction LossFunction::scaled_sum(std::vector<std::pair<double, LossFunction>> terms) {
  return LossFunction(std::make_shared<ScaledSumLoss>(std::move(terms)));
}
LossFunction LossFunction::opaque(std::function<double(const Vector&)> eval,
                                  double lipschitz, std::string descriptor) {
  return LossFunction(std::make_shared<OpaqueLoss>(std::move(eval), lipschitz,
                                                   std::move(descriptor)));
}
LossFunction LossFunction::with_lipschitz(LossFunction f, double lipschitz) {
  return LossFunction(std::make_shared<DeclaredLipLoss>(std::move(f), lipschitz));
}

LipschitzAudit lipschitz_audit(const LossFunction& f, const Box& box,
                               int n_pairs, const RngStream& stream) {
  if (n_pairs < 1) throw std::invalid_argument("lipschitz_audit: n_pairs >= 1");
  const auto d = static_cast<std::uint64_t>(box.dim());
  LipschitzAudit audit;
  for (int k = 0; k < n_pairs; ++k) {
    const std::uint64_t base = 2 * d * static_cast<std::uint64_t>(k);
    const Vector x = box.sample(stream, base);
    const Vector y = box.sample(stream, base + d);
    const double dist = l1_distance(x, y);
    if (dist == 0.0) continue;
    audit.max_ratio = std::max(audit.max_ratio, std::abs(f(x) - f(y)) / dist);
  }
  audit.pass = audit.max_ratio <= f.lipschitz() * (1.0 + 1e-9);
  return audit;
}

}  // namespace ftpl
