#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dbarw/lattice.hpp"

namespace testsupport {

/// Random even configurations for property tests.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : gen_(seed) {}

  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_); }

  /// Even configuration with sites in [offset, offset + span), each occupied
  /// with probability about 1/2 before parity repair.
  dbarw::SiteConfiguration configuration(dbarw::Site span, dbarw::Site max_offset) {
    const dbarw::Site offset =
        std::uniform_int_distribution<dbarw::Site>(-max_offset, max_offset)(gen_);
    std::vector<dbarw::Site> sites;
    for (dbarw::Site s = 0; s < span; ++s) {
      if (below(2)) sites.push_back(offset + s);
    }
    if (sites.size() % 2) sites.pop_back();
    return dbarw::SiteConfiguration::from_sites(std::move(sites));
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace testsupport
