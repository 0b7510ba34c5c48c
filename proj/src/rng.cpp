#include "msgames/rng.hpp"

#include <stdexcept>

namespace msgames {

RngStream::RngStream(std::uint64_t seed, std::uint64_t path_id, std::uint64_t purpose_id)
    : RngStream(seed, path_id, std::vector<std::uint64_t>{purpose_id}) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t path_id, std::vector<std::uint64_t> purposes)
    : seed_(seed), path_id_(path_id), purposes_(std::move(purposes)) {
    reseed();
}

void RngStream::reseed() {
    // seed_seq consumes 32-bit words; split every 64-bit key component.
    std::vector<std::uint32_t> words;
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed_);
    push(path_id_);
    push(purposes_.size());
    for (auto p : purposes_) push(p);
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
    counter_ = 0;
}

RngStream RngStream::fork(std::uint64_t purpose_id) const {
    auto chain = purposes_;
    chain.push_back(purpose_id);
    return RngStream(seed_, path_id_, std::move(chain));
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return engine_();
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    ++counter_;
    return dist(engine_);
}

}  // namespace msgames
