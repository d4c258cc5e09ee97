#include "csc/ad.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace csc::ad {

Var Tape::push(Mat val, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(val), Mat(), std::move(back)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Mat v) { return push(std::move(v)); }

void Tape::backward(Var root) {
  if (nodes_[root.id].val.size() != 1)
    throw std::invalid_argument("backward: root must be a scalar");
  g(root.id)(0, 0) = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0 || !n.back) continue;  // untouched or leaf
    n.back(*this);
  }
}

Var Tape::add(Var a, Var b) {
  Mat v = val(a) + val(b);
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id) += go;
    t.g(b.id) += go;
  });
}

Var Tape::sub(Var a, Var b) {
  Mat v = val(a) - val(b);
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id) += go;
    t.g(b.id) -= go;
  });
}

Var Tape::scale(Var a, double c) {
  Mat v = val(a) * c;
  return push(std::move(v), [a, c, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(a.id) += c * t.nodes_[out].grad;
  });
}

Var Tape::add_const(Var a, double c) {
  Mat v = val(a).array() + c;
  return push(std::move(v), [a, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(a.id) += t.nodes_[out].grad;
  });
}

Var Tape::cmul(Var a, Var b) {
  Mat v = val(a).cwiseProduct(val(b));
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id) += go.cwiseProduct(t.val(b));
    t.g(b.id) += go.cwiseProduct(t.val(a));
  });
}

Var Tape::matmul(Var a, Var b) {
  if (val(a).cols() != val(b).rows()) throw std::invalid_argument("matmul: shape mismatch");
  Mat v = val(a) * val(b);
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id).noalias() += go * t.val(b).transpose();
    t.g(b.id).noalias() += t.val(a).transpose() * go;
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  if (val(a).cols() != val(b).cols()) throw std::invalid_argument("matmul_nt: shape mismatch");
  Mat v = val(a) * val(b).transpose();
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id).noalias() += go * t.val(b);
    t.g(b.id).noalias() += go.transpose() * t.val(a);
  });
}

Var Tape::relu(Var a) {
  Mat v = val(a).cwiseMax(0.0);
  return push(std::move(v), [a, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    const Mat& x = t.val(a);
    t.g(a.id) += go.cwiseProduct((x.array() > 0.0).cast<double>().matrix());
  });
}

Var Tape::bias_add(Var a, Var bias) {
  if (val(bias).rows() != 1 || val(bias).cols() != val(a).cols())
    throw std::invalid_argument("bias_add: bias must be 1 x cols");
  Mat v = val(a).rowwise() + val(bias).row(0);
  return push(std::move(v), [a, bias, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id) += go;
    t.g(bias.id) += go.colwise().sum();
  });
}

Var Tape::rows(Var a, int start, int count) {
  Mat v = val(a).middleRows(start, count);
  return push(std::move(v), [a, start, count, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(a.id).middleRows(start, count) += t.nodes_[out].grad;
  });
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty");
  Eigen::Index total = 0;
  for (Var p : parts) total += val(p).rows();
  Mat v(total, val(parts[0]).cols());
  Eigen::Index at = 0;
  for (Var p : parts) {
    v.middleRows(at, val(p).rows()) = val(p);
    at += val(p).rows();
  }
  return push(std::move(v), [parts, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index r = t.val(p).rows();
      t.g(p.id) += go.middleRows(at, r);
      at += r;
    }
  });
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
  Eigen::Index total = 0;
  for (Var p : parts) total += val(p).cols();
  Mat v(val(parts[0]).rows(), total);
  Eigen::Index at = 0;
  for (Var p : parts) {
    v.middleCols(at, val(p).cols()) = val(p);
    at += val(p).cols();
  }
  return push(std::move(v), [parts, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    Eigen::Index at = 0;
    for (Var p : parts) {
      const Eigen::Index c = t.val(p).cols();
      t.g(p.id) += go.middleCols(at, c);
      at += c;
    }
  });
}

Var Tape::mean_rows(Var a) {
  const double n = static_cast<double>(val(a).rows());
  Mat v = val(a).colwise().mean();
  return push(std::move(v), [a, n, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    t.g(a.id) += (go / n).replicate(t.val(a).rows(), 1);
  });
}

Var Tape::row_combination(Var a, const Eigen::RowVectorXd& weights) {
  if (weights.cols() != val(a).rows())
    throw std::invalid_argument("row_combination: weight length mismatch");
  Mat v = weights * val(a);
  return push(std::move(v), [a, weights, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(a.id).noalias() += weights.transpose() * t.nodes_[out].grad;
  });
}

Var Tape::softmax_rows(Var a) {
  Mat v = val(a);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const double mx = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - mx).exp();
    v.row(r) /= v.row(r).sum();
  }
  return push(std::move(v), [a, out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    const Mat& s = t.nodes_[out].val;
    Mat& ga = t.g(a.id);
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double dot = go.row(r).dot(s.row(r));
      ga.row(r) += s.row(r).cwiseProduct(go.row(r).array().matrix() -
                                         Eigen::RowVectorXd::Constant(s.cols(), dot));
    }
  });
}

Var Tape::layer_norm_rows(Var a, Var gain, Var bias, double eps) {
  const Mat& x = val(a);
  const Eigen::Index n = x.cols();
  Mat xhat(x.rows(), n);
  Eigen::VectorXd inv_sigma(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_sigma(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_sigma(r);
  }
  Mat v = (xhat.array().rowwise() * val(gain).row(0).array()).rowwise() + val(bias).row(0).array();
  return push(std::move(v), [a, gain, bias, xhat, inv_sigma,
                             out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    const Eigen::Index n = go.cols();
    t.g(bias.id) += go.colwise().sum();
    t.g(gain.id) += (go.array() * xhat.array()).colwise().sum().matrix();
    Mat& ga = t.g(a.id);
    const Eigen::RowVectorXd gamma = t.val(gain).row(0);
    for (Eigen::Index r = 0; r < go.rows(); ++r) {
      const Eigen::RowVectorXd gy = go.row(r).cwiseProduct(gamma);
      const double m1 = gy.mean();
      const double m2 = gy.cwiseProduct(xhat.row(r)).mean();
      ga.row(r) += inv_sigma(r) * (gy.array() - m1 - xhat.row(r).array() * m2).matrix();
    }
    (void)n;
  });
}

Var Tape::l2_normalize_rows(Var a, double eps) {
  const Mat& x = val(a);
  Mat v(x.rows(), x.cols());
  Eigen::VectorXd inv_norm(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    inv_norm(r) = 1.0 / std::max(x.row(r).norm(), eps);
    v.row(r) = x.row(r) * inv_norm(r);
  }
  return push(std::move(v),
              [a, inv_norm, out = static_cast<int>(nodes_.size())](Tape& t) {
                const Mat& go = t.nodes_[out].grad;
                const Mat& y = t.nodes_[out].val;
                Mat& ga = t.g(a.id);
                for (Eigen::Index r = 0; r < go.rows(); ++r) {
                  const double dot = go.row(r).dot(y.row(r));
                  ga.row(r) += inv_norm(r) * (go.row(r) - dot * y.row(r));
                }
              });
}

Var Tape::sum_all(Var a) {
  Mat v(1, 1);
  v(0, 0) = val(a).sum();
  return push(std::move(v), [a, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(a.id).array() += t.nodes_[out].grad(0, 0);
  });
}

Var Tape::squared_distance(Var a, Var b) {
  Mat v(1, 1);
  v(0, 0) = (val(a) - val(b)).squaredNorm();
  return push(std::move(v), [a, b, out = static_cast<int>(nodes_.size())](Tape& t) {
    const double go = t.nodes_[out].grad(0, 0);
    const Mat diff = t.val(a) - t.val(b);
    t.g(a.id) += 2.0 * go * diff;
    t.g(b.id) -= 2.0 * go * diff;
  });
}

Var Tape::min_of(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw std::invalid_argument("min_of: empty");
  int arg = 0;
  for (int i = 1; i < static_cast<int>(scalars.size()); ++i)
    if (val(scalars[i])(0, 0) < val(scalars[arg])(0, 0)) arg = i;
  Mat v = val(scalars[arg]);
  Var picked = scalars[arg];
  return push(std::move(v), [picked, out = static_cast<int>(nodes_.size())](Tape& t) {
    t.g(picked.id) += t.nodes_[out].grad;
  });
}

Var Tape::nll_grouped(Var scores, std::vector<NllTerm> terms) {
  const Mat& s = val(scores);
  double total = 0.0;
  for (const auto& term : terms) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int c : term.cols) mx = std::max(mx, s(term.row, c));
    double z = 0.0;
    for (int c : term.cols) z += std::exp(s(term.row, c) - mx);
    total += std::log(z) - (s(term.row, term.target) - mx);
  }
  Mat v(1, 1);
  v(0, 0) = total;
  return push(std::move(v), [scores, terms = std::move(terms),
                             out = static_cast<int>(nodes_.size())](Tape& t) {
    const double go = t.nodes_[out].grad(0, 0);
    const Mat& s = t.val(scores);
    Mat& gs = t.g(scores.id);
    for (const auto& term : terms) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c : term.cols) mx = std::max(mx, s(term.row, c));
      double z = 0.0;
      for (int c : term.cols) z += std::exp(s(term.row, c) - mx);
      for (int c : term.cols) gs(term.row, c) += go * std::exp(s(term.row, c) - mx) / z;
      gs(term.row, term.target) -= go;
    }
  });
}

const std::vector<int>& im2col_indices(const ConvGeom& g) {
  static std::map<std::array<int, 7>, std::vector<int>> cache;
  const std::array<int, 7> key{g.in_c, g.in_h, g.in_w, g.out_c, g.kernel, g.stride, g.pad};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<int> idx(static_cast<size_t>(g.positions()) * g.col_width());
  size_t at = 0;
  for (int oy = 0; oy < g.out_h(); ++oy)
    for (int ox = 0; ox < g.out_w(); ++ox)
      for (int c = 0; c < g.in_c; ++c)
        for (int ky = 0; ky < g.kernel; ++ky)
          for (int kx = 0; kx < g.kernel; ++kx) {
            const int iy = oy * g.stride - g.pad + ky;
            const int ix = ox * g.stride - g.pad + kx;
            idx[at++] = (iy >= 0 && iy < g.in_h && ix >= 0 && ix < g.in_w)
                            ? c * g.in_h * g.in_w + iy * g.in_w + ix
                            : -1;
          }
  return cache.emplace(key, std::move(idx)).first->second;
}

Var Tape::conv_stage(Var x, Var weights, Var bias, const ConvGeom& geom) {
  const Mat& xin = val(x);
  if (xin.cols() != geom.in_c * geom.in_h * geom.in_w)
    throw std::invalid_argument("conv_stage: input width mismatch");
  if (val(weights).rows() != geom.out_c || val(weights).cols() != geom.col_width())
    throw std::invalid_argument("conv_stage: weight shape mismatch");

  const int B = static_cast<int>(xin.rows());
  const int P = geom.positions();
  const int K = geom.col_width();
  const std::vector<int>& idx = im2col_indices(geom);

  auto col = std::make_shared<Mat>(static_cast<Eigen::Index>(B) * P, K);
  for (int b = 0; b < B; ++b)
    for (int p = 0; p < P; ++p) {
      const int row = b * P + p;
      const int* ip = idx.data() + static_cast<size_t>(p) * K;
      for (int j = 0; j < K; ++j) (*col)(row, j) = ip[j] >= 0 ? xin(b, ip[j]) : 0.0;
    }

  // (B*P) x out_c, then repack to B x (out_c * P), channel-major.
  Mat y0 = (*col) * val(weights).transpose();
  y0.rowwise() += val(bias).row(0);
  Mat out(B, static_cast<Eigen::Index>(geom.out_c) * P);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < geom.out_c; ++c)
      for (int p = 0; p < P; ++p) out(b, c * P + p) = y0(b * P + p, c);

  return push(std::move(out), [x, weights, bias, geom, col, B, P, K,
                               out_id = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out_id].grad;
    Mat dy0(static_cast<Eigen::Index>(B) * P, geom.out_c);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < geom.out_c; ++c)
        for (int p = 0; p < P; ++p) dy0(b * P + p, c) = go(b, c * P + p);

    t.g(weights.id).noalias() += dy0.transpose() * (*col);
    t.g(bias.id) += dy0.colwise().sum();

    Mat dcol = dy0 * t.val(weights);
    Mat& gx = t.g(x.id);
    const std::vector<int>& idx = im2col_indices(geom);
    for (int b = 0; b < B; ++b)
      for (int p = 0; p < P; ++p) {
        const int row = b * P + p;
        const int* ip = idx.data() + static_cast<size_t>(p) * K;
        for (int j = 0; j < K; ++j)
          if (ip[j] >= 0) gx(b, ip[j]) += dcol(row, j);
      }
  });
}

Var Tape::global_avg_pool(Var x, int channels, int positions) {
  const Mat& xin = val(x);
  if (xin.cols() != static_cast<Eigen::Index>(channels) * positions)
    throw std::invalid_argument("global_avg_pool: width mismatch");
  const int B = static_cast<int>(xin.rows());
  Mat v(B, channels);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < channels; ++c)
      v(b, c) = xin.row(b).segment(static_cast<Eigen::Index>(c) * positions, positions).mean();
  return push(std::move(v), [x, channels, positions, B,
                             out = static_cast<int>(nodes_.size())](Tape& t) {
    const Mat& go = t.nodes_[out].grad;
    Mat& gx = t.g(x.id);
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < channels; ++c)
        gx.row(b)
            .segment(static_cast<Eigen::Index>(c) * positions, positions)
            .array() += go(b, c) / positions;
  });
}

}  // namespace csc::ad
