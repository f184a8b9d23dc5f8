#include "stochograd/vector.hpp"

#include <sstream>

namespace stochograd {

Shape Shape::flat(Index d) {
  if (d < 1) throw ShapeError("flat shape needs d >= 1");
  Shape s;
  s.kind = Kind::flat;
  s.rows = d;
  s.cols = 1;
  s.channels = 1;
  return s;
}

Shape Shape::image(Index h, Index w, Index channels) {
  if (h < 1 || w < 1 || channels < 1) throw ShapeError("image shape needs h, w, channels >= 1");
  Shape s;
  s.kind = Kind::image;
  s.rows = h;
  s.cols = w;
  s.channels = channels;
  return s;
}

std::string Shape::str() const {
  std::ostringstream os;
  if (kind == Kind::flat) {
    os << "flat(" << rows << ")";
  } else {
    os << "image(" << rows << "x" << cols;
    if (channels != 1) os << "x" << channels;
    os << ")";
  }
  return os.str();
}

void require_same_shape(const Shape& expected, const Shape& actual, const char* what) {
  if (!(expected == actual)) {
    throw ShapeError(std::string(what) + ": expected " + expected.str() + ", got " + actual.str());
  }
}

DenseVector::DenseVector(const Shape& shape) : shape_(shape), values_(Vec::Zero(shape.size())) {}

DenseVector::DenseVector(const Shape& shape, Vec values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeError("value count " + std::to_string(values_.size()) + " does not match " + shape_.str());
  }
}

DenseVector::DenseVector(std::initializer_list<double> values)
    : shape_(Shape::flat(static_cast<Index>(values.size()))), values_(static_cast<Index>(values.size())) {
  Index i = 0;
  for (double v : values) values_[i++] = v;
}

DenseVector DenseVector::constant(const Shape& shape, double value) {
  return DenseVector(shape, Vec::Constant(shape.size(), value));
}

DenseVector DenseVector::like(Vec values) const { return DenseVector(shape_, std::move(values)); }

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  require_same_shape(shape_, other.shape_, "operator+=");
  values_ += other.values_;
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  require_same_shape(shape_, other.shape_, "operator-=");
  values_ -= other.values_;
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  values_ *= s;
  return *this;
}

double dot(const DenseVector& a, const DenseVector& b) {
  require_same_shape(a.shape(), b.shape(), "dot");
  return a.values().dot(b.values());
}

double norm(const DenseVector& a) { return a.values().norm(); }

}  // namespace stochograd
