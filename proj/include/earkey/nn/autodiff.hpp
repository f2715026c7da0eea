#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "earkey/common.hpp"

namespace earkey::nn {

using Mat = Eigen::MatrixXd;

// Dynamic reverse-mode tape over matrices. Values are computed eagerly as the
// graph is built; backward() runs the recorded adjoints in reverse order.
// Node ids are topologically ordered by construction.
class Tape {
 public:
  int leaf(Mat v) {
    nodes_.emplace_back();
    nodes_.back().value = std::move(v);
    return static_cast<int>(nodes_.size()) - 1;
  }

  const Mat& val(int id) const { return nodes_[id].value; }

  Mat& grad(int id) {
    Node& n = nodes_[id];
    if (!n.touched) {
      n.grad = Mat::Zero(n.value.rows(), n.value.cols());
      n.touched = true;
    }
    return n.grad;
  }

  bool has_grad(int id) const { return nodes_[id].touched; }

  // Seeds the (scalar) root with 1 and accumulates adjoints into every
  // ancestor. May be called once per forward build.
  void backward(int root) {
    if (val(root).size() != 1)
      throw ConfigError("Tape::backward: root must be a scalar");
    grad(root)(0, 0) = 1.0;
    for (int id = root; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.touched || !n.backward) continue;
      n.backward(*this, id);
    }
  }

  size_t size() const { return nodes_.size(); }

  // ---- ops ----

  int matmul(int a, int b) {
    Mat v = val(a) * val(b);
    return make(std::move(v), [a, b](Tape& t, int id) {
      const Mat& g = t.grad(id);
      t.grad(a).noalias() += g * t.val(b).transpose();
      t.grad(b).noalias() += t.val(a).transpose() * g;
    });
  }

  int add(int a, int b) {
    check_same_shape(a, b, "add");
    Mat v = val(a) + val(b);
    return make(std::move(v), [a, b](Tape& t, int id) {
      t.grad(a) += t.grad(id);
      t.grad(b) += t.grad(id);
    });
  }

  // a: P x T, bias: P x 1 broadcast over columns.
  int add_bias(int a, int bias) {
    Mat v = val(a).colwise() + Eigen::VectorXd(val(bias).col(0));
    return make(std::move(v), [a, bias](Tape& t, int id) {
      t.grad(a) += t.grad(id);
      t.grad(bias) += t.grad(id).rowwise().sum();
    });
  }

  int sub(int a, int b) {
    check_same_shape(a, b, "sub");
    Mat v = val(a) - val(b);
    return make(std::move(v), [a, b](Tape& t, int id) {
      t.grad(a) += t.grad(id);
      t.grad(b) -= t.grad(id);
    });
  }

  int scale(int a, double s) {
    Mat v = val(a) * s;
    return make(std::move(v), [a, s](Tape& t, int id) {
      t.grad(a) += t.grad(id) * s;
    });
  }

  int mul(int a, int b) {
    check_same_shape(a, b, "mul");
    Mat v = val(a).cwiseProduct(val(b));
    return make(std::move(v), [a, b](Tape& t, int id) {
      t.grad(a) += t.grad(id).cwiseProduct(t.val(b));
      t.grad(b) += t.grad(id).cwiseProduct(t.val(a));
    });
  }

  int relu(int a) {
    Mat v = val(a).cwiseMax(0.0);
    return make(std::move(v), [a](Tape& t, int id) {
      t.grad(a) += t.grad(id)
                       .cwiseProduct((t.val(a).array() > 0.0).cast<double>().matrix());
    });
  }

  int tanh_(int a) {
    Mat v = val(a).array().tanh().matrix();
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& y = t.val(id);
      t.grad(a) += t.grad(id).cwiseProduct(
          (1.0 - y.array().square()).matrix());
    });
  }

  int sigmoid(int a) {
    Mat v = (1.0 / (1.0 + (-val(a).array()).exp())).matrix();
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& y = t.val(id);
      t.grad(a) += t.grad(id).cwiseProduct(
          (y.array() * (1.0 - y.array())).matrix());
    });
  }

  int concat_rows(int a, int b) {
    if (val(a).cols() != val(b).cols())
      throw ConfigError("concat_rows: column count mismatch");
    Mat v(val(a).rows() + val(b).rows(), val(a).cols());
    v.topRows(val(a).rows()) = val(a);
    v.bottomRows(val(b).rows()) = val(b);
    const long ra = val(a).rows();
    return make(std::move(v), [a, b, ra](Tape& t, int id) {
      const Mat& g = t.grad(id);
      t.grad(a) += g.topRows(ra);
      t.grad(b) += g.bottomRows(g.rows() - ra);
    });
  }

  int concat_cols(const std::vector<int>& ids) {
    if (ids.empty()) throw ConfigError("concat_cols: empty list");
    long cols = 0;
    for (int i : ids) cols += val(i).cols();
    Mat v(val(ids[0]).rows(), cols);
    long off = 0;
    for (int i : ids) {
      v.middleCols(off, val(i).cols()) = val(i);
      off += val(i).cols();
    }
    return make(std::move(v), [ids](Tape& t, int id) {
      const Mat& g = t.grad(id);
      long off = 0;
      for (int i : ids) {
        const long c = t.val(i).cols();
        t.grad(i) += g.middleCols(off, c);
        off += c;
      }
    });
  }

  int slice_cols(int a, long start, long n) {
    Mat v = val(a).middleCols(start, n);
    return make(std::move(v), [a, start, n](Tape& t, int id) {
      t.grad(a).middleCols(start, n) += t.grad(id);
    });
  }

  int slice_rows(int a, long start, long n) {
    Mat v = val(a).middleRows(start, n);
    return make(std::move(v), [a, start, n](Tape& t, int id) {
      t.grad(a).middleRows(start, n) += t.grad(id);
    });
  }

  int transpose(int a) {
    Mat v = val(a).transpose();
    return make(std::move(v), [a](Tape& t, int id) {
      t.grad(a) += t.grad(id).transpose();
    });
  }

  int reverse_cols(int a) {
    Mat v = val(a).rowwise().reverse();
    return make(std::move(v), [a](Tape& t, int id) {
      t.grad(a) += t.grad(id).rowwise().reverse();
    });
  }

  // Right-shift columns by s, zero-filling on the left (causal delay).
  int shift_cols(int a, long s) {
    const Mat& x = val(a);
    Mat v = Mat::Zero(x.rows(), x.cols());
    if (s < x.cols()) v.rightCols(x.cols() - s) = x.leftCols(x.cols() - s);
    return make(std::move(v), [a, s](Tape& t, int id) {
      const Mat& g = t.grad(id);
      if (s < g.cols())
        t.grad(a).leftCols(g.cols() - s) += g.rightCols(g.cols() - s);
    });
  }

  int mean_cols(int a) {
    const long cols = val(a).cols();
    if (cols == 0) throw ConfigError("mean_cols: empty matrix");
    Mat v = val(a).rowwise().mean();
    return make(std::move(v), [a, cols](Tape& t, int id) {
      t.grad(a) += (t.grad(id) / static_cast<double>(cols))
                       .replicate(1, cols);
    });
  }

  int mean_all(int a) {
    const double n = static_cast<double>(val(a).size());
    Mat v(1, 1);
    v(0, 0) = val(a).sum() / n;
    return make(std::move(v), [a, n](Tape& t, int id) {
      t.grad(a).array() += t.grad(id)(0, 0) / n;
    });
  }

  int sum_all(int a) {
    Mat v(1, 1);
    v(0, 0) = val(a).sum();
    return make(std::move(v), [a](Tape& t, int id) {
      t.grad(a).array() += t.grad(id)(0, 0);
    });
  }

  // Column-wise L2 normalization; columns must be non-zero.
  int l2_normalize_cols(int a) {
    const Mat& x = val(a);
    Mat v(x.rows(), x.cols());
    for (long j = 0; j < x.cols(); ++j) {
      const double n = x.col(j).norm();
      if (n == 0.0) throw DataError("l2_normalize_cols: zero-norm column");
      v.col(j) = x.col(j) / n;
    }
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& x = t.val(a);
      const Mat& y = t.val(id);
      const Mat& g = t.grad(id);
      Mat& gx = t.grad(a);
      for (long j = 0; j < x.cols(); ++j) {
        const double n = x.col(j).norm();
        const double dot = y.col(j).dot(g.col(j));
        gx.col(j) += (g.col(j) - y.col(j) * dot) / n;
      }
    });
  }

  // (P x N, P x N) -> 1 x N of per-column dot products.
  int colwise_dot(int a, int b) {
    check_same_shape(a, b, "colwise_dot");
    Mat v = (val(a).cwiseProduct(val(b))).colwise().sum();
    return make(std::move(v), [a, b](Tape& t, int id) {
      const Mat& g = t.grad(id);
      for (long j = 0; j < g.cols(); ++j) {
        t.grad(a).col(j) += g(0, j) * t.val(b).col(j);
        t.grad(b).col(j) += g(0, j) * t.val(a).col(j);
      }
    });
  }

  // N x N -> 1 x N: out[i] = S(i, col_of_row[i]).
  int gather_cols_rowwise(int s, std::vector<long> col_of_row) {
    const Mat& x = val(s);
    Mat v(1, x.rows());
    for (long i = 0; i < x.rows(); ++i) v(0, i) = x(i, col_of_row[i]);
    return make(std::move(v),
                [s, idx = std::move(col_of_row)](Tape& t, int id) {
                  const Mat& g = t.grad(id);
                  for (long i = 0; i < g.cols(); ++i)
                    t.grad(s)(i, idx[i]) += g(0, i);
                });
  }

  int diag_as_row(int a) {
    const Mat& x = val(a);
    const long n = std::min(x.rows(), x.cols());
    Mat v(1, n);
    for (long i = 0; i < n; ++i) v(0, i) = x(i, i);
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& g = t.grad(id);
      for (long i = 0; i < g.cols(); ++i) t.grad(a)(i, i) += g(0, i);
    });
  }

  // N x M -> N x 1 of log(sum_j exp(row_ij)).
  int logsumexp_rows(int a) {
    const Mat& x = val(a);
    Mat v(x.rows(), 1);
    for (long i = 0; i < x.rows(); ++i) {
      const double m = x.row(i).maxCoeff();
      v(i, 0) = m + std::log((x.row(i).array() - m).exp().sum());
    }
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& x = t.val(a);
      const Mat& y = t.val(id);
      const Mat& g = t.grad(id);
      for (long i = 0; i < x.rows(); ++i)
        t.grad(a).row(i) +=
            g(i, 0) * (x.row(i).array() - y(i, 0)).exp().matrix();
    });
  }

  // Log-softmax independently over every column.
  int log_softmax_cols(int a) {
    const Mat& x = val(a);
    Mat v(x.rows(), x.cols());
    for (long j = 0; j < x.cols(); ++j) {
      const double m = x.col(j).maxCoeff();
      const double lse = m + std::log((x.col(j).array() - m).exp().sum());
      v.col(j) = x.col(j).array() - lse;
    }
    return make(std::move(v), [a](Tape& t, int id) {
      const Mat& y = t.val(id);
      const Mat& g = t.grad(id);
      Mat& gx = t.grad(a);
      for (long j = 0; j < y.cols(); ++j) {
        const double gsum = g.col(j).sum();
        gx.col(j) += g.col(j) - y.col(j).array().exp().matrix() * gsum;
      }
    });
  }

  // Elementwise arccos with inputs clamped to [-1+eps, 1-eps].
  int arccos_clamped(int a, double eps = 1e-7) {
    const Mat& x = val(a);
    Mat v = x.array().min(1.0 - eps).max(-1.0 + eps).acos().matrix();
    return make(std::move(v), [a, eps](Tape& t, int id) {
      auto clamped = t.val(a).array().min(1.0 - eps).max(-1.0 + eps);
      t.grad(a) += t.grad(id).cwiseProduct(
          (-1.0 / (1.0 - clamped.square()).sqrt()).matrix());
    });
  }

  // Custom node: fixed local gradient w.r.t. a single parent, scaled by the
  // upstream adjoint. Used for losses whose gradients come from dynamic
  // programming rather than recorded ops.
  int custom_scalar(int a, double value, Mat grad_wrt_a) {
    Mat v(1, 1);
    v(0, 0) = value;
    return make(std::move(v), [a, g = std::move(grad_wrt_a)](Tape& t, int id) {
      t.grad(a) += t.grad(id)(0, 0) * g;
    });
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool touched = false;
    std::function<void(Tape&, int)> backward;
  };

  int make(Mat v, std::function<void(Tape&, int)> bw) {
    nodes_.emplace_back();
    nodes_.back().value = std::move(v);
    nodes_.back().backward = std::move(bw);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void check_same_shape(int a, int b, const char* op) const {
    if (val(a).rows() != val(b).rows() || val(a).cols() != val(b).cols())
      throw ConfigError(std::string(op) + ": shape mismatch");
  }

  std::vector<Node> nodes_;
};

}  // namespace earkey::nn
