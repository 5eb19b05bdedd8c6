#include "softtree/replay.hpp"

#include <cmath>
#include <string>

#include "softtree/error.hpp"

namespace softtree {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
    if (!std::isfinite(t.c)) throw ValidationError("transition cost is not finite");
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size) {
    if (batch_size == 0 || data_.size() < batch_size) {
        throw ContractViolation("cannot sample " + std::to_string(batch_size) + " transitions from " +
                                std::to_string(data_.size()));
    }
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    std::vector<std::size_t> idx(batch_size);
    for (auto& i : idx) i = pick(rng_);
    return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size) {
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (auto i : sample_indices(batch_size)) out.push_back(data_[i]);
    return out;
}

}  // namespace softtree
