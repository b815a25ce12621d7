#pragma once

#include <Eigen/Dense>
#include <vector>

namespace apcauchy {

/// One exponential term c * exp(i * lambda * t) with vector coefficient c.
struct TrigTerm {
  double lambda = 0.0;
  Eigen::VectorXcd coeff;
};

/// Finite trigonometric polynomial sum_j c_j exp(i * lambda_j t).
///
/// When the realness flag is set the terms must pair up as (lambda, c) with
/// (-lambda, conj(c)) so that the sum is real; construction verifies this to
/// 1e-12 and eval() then returns the exact real part.
class TrigPolynomial {
 public:
  TrigPolynomial(int dim, std::vector<TrigTerm> terms, bool real_valued = true);

  int dim() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool real_valued() const { return real_valued_; }

  Eigen::VectorXcd eval_complex(double t) const;

  /// Real evaluation; requires the realness flag.
  Eigen::VectorXd eval(double t) const;

  /// The same polynomial translated: shifted(tau)(t) == (*this)(t + tau).
  TrigPolynomial shifted(double tau) const;

  /// Termwise sum; dimensions must agree.
  TrigPolynomial operator+(const TrigPolynomial& other) const;
  TrigPolynomial scaled(double factor) const;

  /// a * sin(freq t) in component `comp` of a dim-dimensional signal.
  static TrigPolynomial sine(double freq, double amplitude = 1.0, int dim = 1, int comp = 0);
  static TrigPolynomial cosine(double freq, double amplitude = 1.0, int dim = 1, int comp = 0);
  static TrigPolynomial constant(const Eigen::VectorXd& value);

 private:
  int dim_;
  std::vector<TrigTerm> terms_;
  bool real_valued_;
};

}  // namespace apcauchy
