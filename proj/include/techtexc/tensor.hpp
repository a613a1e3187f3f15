#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace techtexc {

/// Dense row-major n-dimensional array. Float for training, double for
/// gradient checks; every layer consumes and produces these.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
        std::size_t n = shape_.empty() ? 0 : 1;
        for (std::size_t d : shape_) {
            assert(d > 0);
            n *= d;
        }
        data_.assign(n, T{});
    }

    Tensor(std::initializer_list<std::size_t> shape)
        : Tensor(std::vector<std::size_t>(shape)) {}

    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const {
        assert(i < shape_.size());
        return shape_[i];
    }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::span<T> flat() { return data_; }
    std::span<const T> flat() const { return data_; }

    /// Contiguous block for leading index i (all trailing dims). For a
    /// [L, D] tensor this is row i; for [K, D, F] it is the K-th slice.
    std::span<T> row(std::size_t i) {
        const std::size_t stride = size() / dim(0);
        assert(i < dim(0));
        return {data_.data() + i * stride, stride};
    }
    std::span<const T> row(std::size_t i) const {
        const std::size_t stride = size() / dim(0);
        assert(i < dim(0));
        return {data_.data() + i * stride, stride};
    }

    T& operator()(std::size_t i) {
        assert(rank() == 1 && i < shape_[0]);
        return data_[i];
    }
    const T& operator()(std::size_t i) const {
        assert(rank() == 1 && i < shape_[0]);
        return data_[i];
    }
    T& operator()(std::size_t i, std::size_t j) {
        assert(rank() == 2 && i < shape_[0] && j < shape_[1]);
        return data_[i * shape_[1] + j];
    }
    const T& operator()(std::size_t i, std::size_t j) const {
        assert(rank() == 2 && i < shape_[0] && j < shape_[1]);
        return data_[i * shape_[1] + j];
    }
    T& operator()(std::size_t i, std::size_t j, std::size_t k) {
        assert(rank() == 3 && i < shape_[0] && j < shape_[1] && k < shape_[2]);
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
        assert(rank() == 3 && i < shape_[0] && j < shape_[1] && k < shape_[2]);
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(T v) { data_.assign(data_.size(), v); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (T v : data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<T> data_;
};

/// Rows reversed in time: out.row(t) = in.row(L-1-t). Input must be rank 2.
template <typename T>
Tensor<T> reverse_rows(const Tensor<T>& x) {
    assert(x.rank() == 2);
    Tensor<T> out(x.shape());
    const std::size_t rows = x.dim(0);
    for (std::size_t t = 0; t < rows; ++t) {
        auto src = x.row(rows - 1 - t);
        auto dst = out.row(t);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
    }
    return out;
}

} // namespace techtexc
