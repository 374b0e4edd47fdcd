#pragma once

#include <Eigen/Core>

#include <array>

namespace symlight {

// Row-major maps indexed (row v, column u).
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Three planes (x, y, z) of a vector-valued map.
template <typename Scalar>
using Image3 = std::array<Image<Scalar>, 3>;

template <typename Scalar>
Image3<Scalar> make_image3(int height, int width, Scalar fill = Scalar(0)) {
  return {Image<Scalar>::Constant(height, width, fill), Image<Scalar>::Constant(height, width, fill),
          Image<Scalar>::Constant(height, width, fill)};
}

}  // namespace symlight
