#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "softtree/ddt.hpp"
#include "softtree/observation.hpp"

namespace softtree {

struct Transition {
    Observation x{};       // normalized
    ActionIndex u = 0;
    double c = 0.0;        // step cost, EUR
    Observation x_next{};  // normalized
    bool done = false;
};

// Bounded FIFO store with uniform sampling (with replacement).
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(const Transition& t);

    // Throws ContractViolation when fewer than `batch_size` transitions are
    // stored.
    std::vector<Transition> sample(std::size_t batch_size);

    // Indices drawn by sample(), exposed for uniformity checks.
    std::vector<std::size_t> sample_indices(std::size_t batch_size);

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return data_[i]; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
    std::mt19937_64 rng_;
};

}  // namespace softtree
