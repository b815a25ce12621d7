#include "apcauchy/trig_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace apcauchy {

namespace {
constexpr double kPairTol = 1e-12;
}

TrigPolynomial::TrigPolynomial(int dim, std::vector<TrigTerm> terms, bool real_valued)
    : dim_(dim), terms_(std::move(terms)), real_valued_(real_valued) {
  if (dim_ < 1) throw std::invalid_argument("TrigPolynomial: dimension must be positive");
  for (const auto& term : terms_) {
    if (term.coeff.size() != dim_)
      throw std::invalid_argument("TrigPolynomial: coefficient dimension mismatch");
    if (!term.coeff.allFinite() || !std::isfinite(term.lambda))
      throw std::invalid_argument("TrigPolynomial: non-finite term");
  }
  // Deterministic term order: by frequency, stable across construction paths.
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const TrigTerm& a, const TrigTerm& b) { return a.lambda < b.lambda; });
  // Merge terms whose frequencies coincide within kPairTol.
  std::vector<TrigTerm> merged;
  for (const auto& term : terms_) {
    if (!merged.empty() && std::abs(merged.back().lambda - term.lambda) <= kPairTol)
      merged.back().coeff += term.coeff;
    else
      merged.push_back(term);
  }
  terms_ = std::move(merged);
  if (real_valued_) {
    for (const auto& term : terms_) {
      Eigen::VectorXcd mate = Eigen::VectorXcd::Zero(dim_);
      for (const auto& other : terms_)
        if (std::abs(other.lambda + term.lambda) <= kPairTol) mate += other.coeff;
      if ((mate - term.coeff.conjugate()).norm() > kPairTol * std::max(1.0, term.coeff.norm()))
        throw std::invalid_argument(
            "TrigPolynomial: realness flag requires conjugate-paired terms");
    }
  }
}

Eigen::VectorXcd TrigPolynomial::eval_complex(double t) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(dim_);
  for (const auto& term : terms_)
    out += term.coeff * std::exp(std::complex<double>(0.0, term.lambda * t));
  return out;
}

Eigen::VectorXd TrigPolynomial::eval(double t) const {
  if (!real_valued_)
    throw std::logic_error("TrigPolynomial::eval: polynomial is not flagged real-valued");
  return eval_complex(t).real();
}

TrigPolynomial TrigPolynomial::shifted(double tau) const {
  std::vector<TrigTerm> terms = terms_;
  for (auto& term : terms)
    term.coeff *= std::exp(std::complex<double>(0.0, term.lambda * tau));
  return TrigPolynomial(dim_, std::move(terms), real_valued_);
}

TrigPolynomial TrigPolynomial::operator+(const TrigPolynomial& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("TrigPolynomial: dimension mismatch in sum");
  std::vector<TrigTerm> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return TrigPolynomial(dim_, std::move(terms), real_valued_ && other.real_valued_);
}

TrigPolynomial TrigPolynomial::scaled(double factor) const {
  std::vector<TrigTerm> terms = terms_;
  for (auto& term : terms) term.coeff *= factor;
  return TrigPolynomial(dim_, std::move(terms), real_valued_);
}

TrigPolynomial TrigPolynomial::sine(double freq, double amplitude, int dim, int comp) {
  // sin(w t) = -i/2 e^{iwt} + i/2 e^{-iwt}
  Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd minus = Eigen::VectorXcd::Zero(dim);
  plus(comp) = std::complex<double>(0.0, -0.5 * amplitude);
  minus(comp) = std::complex<double>(0.0, 0.5 * amplitude);
  return TrigPolynomial(dim, {{freq, plus}, {-freq, minus}}, true);
}

TrigPolynomial TrigPolynomial::cosine(double freq, double amplitude, int dim, int comp) {
  Eigen::VectorXcd half = Eigen::VectorXcd::Zero(dim);
  half(comp) = std::complex<double>(0.5 * amplitude, 0.0);
  return TrigPolynomial(dim, {{freq, half}, {-freq, half}}, true);
}

TrigPolynomial TrigPolynomial::constant(const Eigen::VectorXd& value) {
  return TrigPolynomial(static_cast<int>(value.size()),
                        {{0.0, value.cast<std::complex<double>>()}}, true);
}

}  // namespace apcauchy
