#pragma once

// Brute-force reference for the estimators, written from the defining sums
// with its own distance, kernel, edge and quadrature code. Nothing here calls
// into the library.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace oracle {

struct Data {
  double x0{0}, x1{1}, y0{0}, y1{1};
  bool torus{true};
  std::vector<double> x, y;
  std::vector<int> type;  // empty when unlabelled
  std::size_t p{0};
  std::vector<double> t;  // time samples
  std::vector<double> f;  // f[(i * p + ch) * T + k]

  std::size_t n() const { return x.size(); }
  std::size_t T() const { return t.size(); }
  double mark(std::size_t i, std::size_t ch, std::size_t k) const { return f[(i * p + ch) * T() + k]; }
};

struct Settings {
  int kernel{0};  // 0 epanechnikov, 1 box, 2 truncated gaussian
  double b{0.1};
  std::vector<double> r;
  std::size_t lag{0};
  bool distinct{false};   // c-hat over i != j only
  bool pointwise{false};  // mean normalisers applied per t
};

double distance(const Data& d, std::size_t i, std::size_t j);
double kernel(int shape, double u, double b);
double edge(const Data& d, std::size_t i, std::size_t j);
/// Trapezoid on explicit abscissae; a single sample is returned as is.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v);

/// Test functions by number 1..5.
double tf(int which, double a, double b);

std::vector<double> ground(const Data& d, const Settings& s, const std::string& which);

/// Mark characteristic by library name (gamma_hl, kappa_hl, ..., c_dotl).
std::vector<double> mark_stat(const Data& d, const Settings& s, const std::string& which,
                              std::size_t h, std::size_t l);

/// norm: "c_hat", "mean_product", "mean_left", "mean_right", "unit".
std::vector<double> kappa_tf(const Data& d, const Settings& s, int which_tf, std::size_t h,
                             std::size_t l, const std::string& norm);
std::vector<double> rho_tf(const Data& d, const Settings& s, int which_tf, std::size_t h,
                           std::size_t l);

std::vector<double> U(const Data& d, const Settings& s, const std::string& base, std::size_t h,
                      std::size_t l);

struct Weighted {
  std::string which;          // g_tf, K_tf, L_tf
  std::optional<int> tf;      // empty = unit weight
  std::optional<int> type_i;  // cross / dot type
  std::optional<int> type_j;  // empty with type_i = dot type
  std::optional<std::size_t> local;
};

std::vector<double> weighted(const Data& d, const Settings& s, const Weighted& w, std::size_t h,
                             std::size_t l);

struct Multi {
  int base{1};
  bool pairwise_sum{false};
  std::size_t left{0};
  std::vector<std::size_t> right;
};

std::vector<double> multi_kappa(const Data& d, const Settings& s, const Multi& m, bool normalise);

struct NN {
  double gamma_nn, gamma_nn_raw, kappa_nn, c_nn, tau_nn, c_dotl_nn, kappa_dotl_nn;
  std::vector<double> K_k, Gamma_k, D_k;
};

NN nn_indices(const Data& d, const Settings& s, std::size_t h, std::size_t l, std::size_t k_max);

}  // namespace oracle
