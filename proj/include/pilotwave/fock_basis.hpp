#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace pilotwave {

/// Occupation-number basis of a truncated bosonic Fock space over a finite set
/// of modes (lattice sites or grid points).
///
/// Every basis state is a multiset of at most `n_max` mode indices. States are
/// ordered by particle number first and lexicographically by their sorted mode
/// tuple within a sector, so the sector-n block is the contiguous index range
/// [sector_begin(n), sector_end(n)).
class FockBasis {
 public:
  static constexpr std::size_t kDefaultDimensionCap = 20000;

  FockBasis(int modes, int n_max,
            std::size_t dimension_cap = kDefaultDimensionCap);

  /// Number of states a (modes, n_max) basis would have, without building it.
  static std::size_t dimension_for(int modes, int n_max);

  int modes() const { return modes_; }
  int n_max() const { return n_max_; }
  std::size_t size() const { return sector_of_.size(); }

  int sector(std::size_t index) const { return sector_of_[index]; }
  std::size_t sector_begin(int n) const { return offsets_[n]; }
  std::size_t sector_end(int n) const { return offsets_[n + 1]; }

  /// Sorted mode tuple (length = sector) of a state.
  std::span<const int> sites(std::size_t index) const;
  /// Occupation vector (length = modes) of a state.
  std::vector<int> occupation(std::size_t index) const;

  /// n! / prod_k m_k!, the number of distinct ordered tuples of a state.
  double ordered_count(std::size_t index) const { return ordered_count_[index]; }

  std::optional<std::size_t> find_sites(std::span<const int> sorted_sites) const;
  std::optional<std::size_t> find_occupation(std::span<const int> occupation) const;

  bool operator==(const FockBasis& other) const {
    return modes_ == other.modes_ && n_max_ == other.n_max_;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<int>& key) const noexcept;
  };

  int modes_;
  int n_max_;
  std::vector<std::size_t> offsets_;
  std::vector<int> sector_of_;
  std::vector<std::size_t> site_offset_;
  std::vector<int> site_data_;
  std::vector<double> ordered_count_;
  std::unordered_map<std::vector<int>, std::size_t, KeyHash> lookup_;
};

}  // namespace pilotwave
