#pragma once

// Brute-force reference implementations used by the unit and acceptance
// tests. Each one is written from the definition, shares no code with the
// library, and favours obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace oracle {

using Docs = std::vector<std::vector<int>>;

// log p(w, z) of collapsed LDA with symmetric priors.
inline double collapsed_joint(const Docs& docs, const Docs& z, int K, int W,
                              double alpha, double beta) {
  std::vector<std::vector<double>> nkw(K, std::vector<double>(W, 0.0));
  std::vector<double> nk(K, 0.0);
  double lp = 0.0;
  for (std::size_t m = 0; m < docs.size(); ++m) {
    std::vector<double> nmk(K, 0.0);
    for (std::size_t n = 0; n < docs[m].size(); ++n) {
      nkw[z[m][n]][docs[m][n]] += 1;
      nk[z[m][n]] += 1;
      nmk[z[m][n]] += 1;
    }
    lp += std::lgamma(K * alpha) - K * std::lgamma(alpha);
    for (int k = 0; k < K; ++k) lp += std::lgamma(nmk[k] + alpha);
    lp -= std::lgamma(static_cast<double>(docs[m].size()) + K * alpha);
  }
  for (int k = 0; k < K; ++k) {
    lp += std::lgamma(W * beta) - W * std::lgamma(beta);
    for (int w = 0; w < W; ++w) lp += std::lgamma(nkw[k][w] + beta);
    lp -= std::lgamma(nk[k] + W * beta);
  }
  return lp;
}

// p(z_mn = k | z_-mn, w) by evaluating the joint for every k.
inline std::vector<double> collapsed_conditional(const Docs& docs, Docs z, int K, int W,
                                                 double alpha, double beta, std::size_t m,
                                                 std::size_t n) {
  std::vector<double> lp(K);
  for (int k = 0; k < K; ++k) {
    z[m][n] = k;
    lp[k] = collapsed_joint(docs, z, K, W, alpha, beta);
  }
  const double mx = *std::max_element(lp.begin(), lp.end());
  double total = 0.0;
  for (double& v : lp) total += (v = std::exp(v - mx));
  for (double& v : lp) v /= total;
  return lp;
}

// Rank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      if (y < x[i]) less += 1;
      if (y == x[i]) equal += 1;
    }
    r[i] = 1.0 + less + (equal - 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

// UMass over explicit document sets.
inline double umass(const std::vector<int>& words, const Docs& docs) {
  auto D = [&](int a, int b) {
    int c = 0;
    for (const auto& doc : docs) {
      const std::set<int> s(doc.begin(), doc.end());
      if (s.count(a) && s.count(b)) ++c;
    }
    return c;
  };
  double score = 0.0;
  for (std::size_t m = 1; m < words.size(); ++m) {
    for (std::size_t l = 0; l < m; ++l) {
      score += std::log((D(words[m], words[l]) + 1.0) / D(words[l], words[l]));
    }
  }
  return score;
}

struct Prf {
  double accuracy, precision, recall, f1;  // percentages
};

// Macro averages over classes; a class whose denominator is zero scores 0.
inline Prf macro_prf(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
  double p_sum = 0, r_sum = 0, f_sum = 0, correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
  for (int c = 0; c < classes; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      tp += truth[i] == c && pred[i] == c;
      fp += truth[i] != c && pred[i] == c;
      fn += truth[i] == c && pred[i] != c;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    p_sum += p;
    r_sum += r;
    f_sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return {100.0 * correct / truth.size(), 100.0 * p_sum / classes, 100.0 * r_sum / classes,
          100.0 * f_sum / classes};
}

// Central difference of f at x along coordinate i.
template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h = 1e-5) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace oracle
