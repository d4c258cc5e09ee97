#ifndef CSC_AD_HPP
#define CSC_AD_HPP

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

namespace csc::ad {

using Mat = Eigen::MatrixXd;

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Convolution stage geometry; input/output patches are flattened
// channel-major rows (index = c*h*w + y*w + x).
struct ConvGeom {
  int in_c, in_h, in_w;
  int out_c, kernel, stride, pad;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  int positions() const { return out_h() * out_w(); }
  int col_width() const { return in_c * kernel * kernel; }
};

// One term of a grouped negative log-likelihood: softmax over the given
// columns of one row, negative log of the target column's probability.
struct NllTerm {
  int row;
  std::vector<int> cols;
  int target;
};

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order; backward() walks them in reverse. Scalars are 1x1 matrices.
class Tape {
 public:
  Var input(Mat v);

  const Mat& val(Var v) const { return nodes_[v.id].val; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(root)/d(root) = 1 and propagates. root must be 1x1.
  void backward(Var root);

  size_t size() const { return nodes_.size(); }

  // --- elementwise / linear ---
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  Var add_const(Var a, double c);
  Var cmul(Var a, Var b);
  Var matmul(Var a, Var b);     // A * B
  Var matmul_nt(Var a, Var b);  // A * B^T
  Var relu(Var a);
  Var bias_add(Var a, Var bias);  // A + row-broadcast bias (1 x cols)

  // --- shape ---
  Var rows(Var a, int start, int count);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var mean_rows(Var a);
  Var row_combination(Var a, const Eigen::RowVectorXd& weights);  // weights * A

  // --- normalization / attention pieces ---
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);
  Var l2_normalize_rows(Var a, double eps = 1e-12);

  // --- reductions / losses ---
  Var sum_all(Var a);                  // 1x1
  Var squared_distance(Var a, Var b);  // 1x1, ||a-b||_F^2
  Var min_of(const std::vector<Var>& scalars);
  Var hinge(Var a) { return relu(a); }
  Var nll_grouped(Var scores, std::vector<NllTerm> terms);

  // --- conv net pieces ---
  Var conv_stage(Var x, Var weights, Var bias, const ConvGeom& geom);
  Var global_avg_pool(Var x, int channels, int positions);

 private:
  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&)> back;
  };

  Mat& g(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.val.rows(), n.val.cols());
    return n.grad;
  }

  Var push(Mat val, std::function<void(Tape&)> back = nullptr);

  std::vector<Node> nodes_;
};

// Cached im2col index tables keyed by geometry.
const std::vector<int>& im2col_indices(const ConvGeom& geom);

}  // namespace csc::ad

#endif
