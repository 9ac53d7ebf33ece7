#include "pilotwave/fock_basis.hpp"

#include <string>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

// Multisets of size n over `modes` symbols: C(modes + n - 1, n).
std::size_t multiset_count(int modes, int n) {
  double count = 1.0;
  for (int i = 1; i <= n; ++i) {
    count = count * static_cast<double>(modes + i - 1) / static_cast<double>(i);
  }
  return static_cast<std::size_t>(count + 0.5);
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::size_t FockBasis::KeyHash::operator()(const std::vector<int>& key) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int v : key) {
    h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

std::size_t FockBasis::dimension_for(int modes, int n_max) {
  std::size_t total = 0;
  for (int n = 0; n <= n_max; ++n) total += multiset_count(modes, n);
  return total;
}

FockBasis::FockBasis(int modes, int n_max, std::size_t dimension_cap)
    : modes_(modes), n_max_(n_max) {
  if (modes < 1) throw ParameterError("Fock basis needs at least one mode");
  if (n_max < 0) throw ParameterError("truncation n_max must be >= 0");
  const std::size_t dim = dimension_for(modes, n_max);
  if (dim > dimension_cap) {
    throw StructuralError("basis dimension " + std::to_string(dim) +
                          " exceeds the configured cap " +
                          std::to_string(dimension_cap) +
                          "; raise dimension_cap to at least " +
                          std::to_string(dim));
  }

  offsets_.reserve(n_max + 2);
  sector_of_.reserve(dim);
  site_offset_.reserve(dim + 1);
  ordered_count_.reserve(dim);
  lookup_.reserve(dim);

  std::vector<int> tuple;
  for (int n = 0; n <= n_max; ++n) {
    offsets_.push_back(sector_of_.size());
    tuple.assign(n, 0);
    while (true) {
      const std::size_t index = sector_of_.size();
      sector_of_.push_back(n);
      site_offset_.push_back(site_data_.size());
      site_data_.insert(site_data_.end(), tuple.begin(), tuple.end());

      double multiplicities = 1.0;
      for (int i = 0; i < n;) {
        int j = i;
        while (j < n && tuple[j] == tuple[i]) ++j;
        multiplicities *= factorial(j - i);
        i = j;
      }
      ordered_count_.push_back(factorial(n) / multiplicities);
      lookup_.emplace(tuple, index);

      // next nondecreasing tuple in lexicographic order
      int pos = n - 1;
      while (pos >= 0 && tuple[pos] == modes - 1) --pos;
      if (pos < 0) break;
      const int value = tuple[pos] + 1;
      for (int k = pos; k < n; ++k) tuple[k] = value;
    }
  }
  offsets_.push_back(sector_of_.size());
  site_offset_.push_back(site_data_.size());
}

std::span<const int> FockBasis::sites(std::size_t index) const {
  const std::size_t begin = site_offset_[index];
  const std::size_t end = site_offset_[index + 1];
  return {site_data_.data() + begin, end - begin};
}

std::vector<int> FockBasis::occupation(std::size_t index) const {
  std::vector<int> occ(modes_, 0);
  for (int s : sites(index)) ++occ[s];
  return occ;
}

std::optional<std::size_t> FockBasis::find_sites(std::span<const int> sorted_sites) const {
  if (static_cast<int>(sorted_sites.size()) > n_max_) return std::nullopt;
  auto it = lookup_.find(std::vector<int>(sorted_sites.begin(), sorted_sites.end()));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> FockBasis::find_occupation(std::span<const int> occupation) const {
  if (static_cast<int>(occupation.size()) != modes_) return std::nullopt;
  std::vector<int> key;
  for (int site = 0; site < modes_; ++site) {
    if (occupation[site] < 0) return std::nullopt;
    for (int c = 0; c < occupation[site]; ++c) key.push_back(site);
  }
  return find_sites(key);
}

}  // namespace pilotwave
