#include "rifs/random.hpp"

namespace rifs {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (std::uint64_t c : path) h = mix64(h ^ c);
    return h;
}

} // namespace rifs
