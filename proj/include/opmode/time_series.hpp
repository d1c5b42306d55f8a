#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "opmode/errors.hpp"

namespace opmode {

// An ordered sequence of finite real samples of one signal. Immutable
// after construction; non-finite values and empty series are rejected
// up front so downstream code never has to re-check.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) {
            throw InvalidInput("time series must contain at least one sample");
        }
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!std::isfinite(samples_[i])) {
                throw InvalidInput("time series sample " + std::to_string(i) +
                                   " is not finite");
            }
        }
    }

    std::size_t size() const noexcept { return samples_.size(); }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::span<const double> samples() const noexcept { return samples_; }

    auto begin() const noexcept { return samples_.begin(); }
    auto end() const noexcept { return samples_.end(); }

private:
    std::vector<double> samples_;
};

}  // namespace opmode
