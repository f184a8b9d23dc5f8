#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace stochograd {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when operands disagree on shape or size.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Layout of a flat array. Images are stored row-major, one channel after the
/// other (all pixels of channel 0, then channel 1, ...).
struct Shape {
  enum class Kind { flat, image };

  Kind kind = Kind::flat;
  Index rows = 1;
  Index cols = 1;
  Index channels = 1;

  static Shape flat(Index d);
  static Shape image(Index h, Index w, Index channels = 1);

  Index size() const { return rows * cols * channels; }
  Index pixels() const { return rows * cols; }
  bool is_image() const { return kind == Kind::image; }
  std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Real array with a shape attached. Arithmetic checks shapes at runtime.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(const Shape& shape);
  DenseVector(const Shape& shape, Vec values);
  DenseVector(std::initializer_list<double> values);

  static DenseVector zeros(const Shape& shape) { return DenseVector(shape); }
  static DenseVector constant(const Shape& shape, double value);

  const Shape& shape() const { return shape_; }
  Index size() const { return values_.size(); }

  Vec& values() { return values_; }
  const Vec& values() const { return values_; }

  double& operator[](Index i) { return values_[i]; }
  double operator[](Index i) const { return values_[i]; }

  /// Same shape as *this with the given values.
  DenseVector like(Vec values) const;
  bool all_finite() const { return values_.allFinite(); }

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s);

  friend DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
  friend DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
  friend DenseVector operator*(double s, DenseVector a) { return a *= s; }
  friend DenseVector operator*(DenseVector a, double s) { return a *= s; }
  friend DenseVector operator-(DenseVector a) { return a *= -1.0; }

 private:
  Shape shape_{Shape::Kind::flat, 0, 1, 1};
  Vec values_;
};

double dot(const DenseVector& a, const DenseVector& b);
double norm(const DenseVector& a);

void require_same_shape(const Shape& expected, const Shape& actual, const char* what);

}  // namespace stochograd
