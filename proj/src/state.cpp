#include "pilotwave/state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Decode a row-major ordered tuple index into its sorted cell tuple.
void decode_sorted(std::size_t flat, int n, int points, std::vector<int>& out) {
  out.resize(n);
  for (int k = n - 1; k >= 0; --k) {
    out[k] = static_cast<int>(flat % points);
    flat /= points;
  }
  std::sort(out.begin(), out.end());
}

}  // namespace

double Grid::wrap(double x) const {
  const double L = length();
  double y = std::fmod(x, L);
  if (y < 0) y += L;
  if (y >= L) y -= L;  // fmod of -tiny can round up to L
  return y;
}

int Grid::cell_of(double x) const {
  const double y = wrap(x);
  int j = static_cast<int>(std::floor(y / dx + 0.5));
  if (j >= points) j -= points;
  return j;
}

int LatticeConfig::total() const {
  int s = 0;
  for (int c : occupation) s += c;
  return s;
}

SectorConfig::SectorConfig(std::vector<double> positions, const Grid& grid)
    : positions_(std::move(positions)) {
  const double L = grid.length();
  for (double x : positions_) {
    if (!(x >= 0.0 && x < L)) {
      throw StructuralError("position " + std::to_string(x) +
                            " lies outside the grid [0, " + std::to_string(L) + ")");
    }
  }
  std::sort(positions_.begin(), positions_.end());
}

SectorConfig SectorConfig::at_cells(std::span<const int> cells, const Grid& grid) {
  std::vector<double> xs;
  xs.reserve(cells.size());
  for (int c : cells) {
    if (c < 0 || c >= grid.points) throw StructuralError("cell index outside the grid");
    xs.push_back(grid.node(c));
  }
  return SectorConfig(std::move(xs), grid);
}

SectorConfig SectorConfig::with_added(double position, const Grid& grid) const {
  std::vector<double> xs = positions_;
  xs.push_back(grid.wrap(position));
  return SectorConfig(std::move(xs), grid);
}

SectorConfig SectorConfig::with_removed(std::size_t particle) const {
  SectorConfig out = *this;
  out.positions_.erase(out.positions_.begin() + static_cast<std::ptrdiff_t>(particle));
  return out;
}

QuantumState::QuantumState(std::shared_ptr<const FockBasis> basis,
                           Eigen::VectorXcd amplitudes, std::optional<Grid> grid,
                           double hbar)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)), grid_(grid), hbar_(hbar) {
  if (!basis_) throw StructuralError("quantum state needs a basis");
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_->size()) {
    throw StructuralError("amplitude vector length " + std::to_string(amplitudes_.size()) +
                          " does not match basis dimension " +
                          std::to_string(basis_->size()));
  }
  if (grid_ && grid_->points != basis_->modes()) {
    throw StructuralError("grid point count does not match the number of basis modes");
  }
  if (!(hbar_ > 0)) throw ParameterError("hbar must be positive");
}

QuantumState QuantumState::basis_state(std::shared_ptr<const FockBasis> basis,
                                       std::size_t index, std::optional<Grid> grid,
                                       double hbar) {
  if (index >= basis->size()) throw StructuralError("basis index out of range");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  amps[static_cast<Eigen::Index>(index)] = 1.0;
  return QuantumState(std::move(basis), std::move(amps), grid, hbar);
}

QuantumState QuantumState::from_sector_functions(
    std::shared_ptr<const FockBasis> basis, const Grid& grid,
    const std::vector<std::pair<int, std::vector<cplx>>>& sectors, double hbar) {
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  const int G = grid.points;
  std::vector<int> cells;
  for (const auto& [n, values] : sectors) {
    if (n < 0 || n > basis->n_max()) throw StructuralError("sector outside truncation");
    if (values.size() != ipow(G, n)) {
      throw StructuralError("sector-" + std::to_string(n) + " array must hold G^n values");
    }
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
      decode_sorted(flat, n, G, cells);
      const auto idx = basis->find_sites(cells);
      amps[static_cast<Eigen::Index>(*idx)] += values[flat];
    }
    const double volume = std::pow(grid.dx, 0.5 * n);
    for (std::size_t m = basis->sector_begin(n); m < basis->sector_end(n); ++m) {
      amps[static_cast<Eigen::Index>(m)] *= volume / std::sqrt(basis->ordered_count(m));
    }
  }
  return QuantumState(std::move(basis), std::move(amps), grid, hbar);
}

const Grid& QuantumState::grid() const {
  if (!grid_) throw StructuralError("lattice state has no spatial grid");
  return *grid_;
}

QuantumState QuantumState::with_amplitudes(Eigen::VectorXcd amplitudes) const {
  return QuantumState(basis_, std::move(amplitudes), grid_, hbar_);
}

QuantumState QuantumState::scaled(cplx factor) const {
  return with_amplitudes(amplitudes_ * factor);
}

QuantumState QuantumState::normalized() const {
  const double n2 = amplitudes_.squaredNorm();
  if (!(n2 > 0)) throw StructuralError("cannot normalize the zero state");
  return with_amplitudes(amplitudes_ / std::sqrt(n2));
}

QuantumState QuantumState::conjugated() const {
  return with_amplitudes(amplitudes_.conjugate());
}

double QuantumState::sector_probability(int n) const {
  if (n < 0 || n > basis_->n_max()) return 0.0;
  const auto begin = static_cast<Eigen::Index>(basis_->sector_begin(n));
  const auto count = static_cast<Eigen::Index>(basis_->sector_end(n)) - begin;
  return amplitudes_.segment(begin, count).squaredNorm();
}

std::vector<cplx> QuantumState::sector_function(int n) const {
  const Grid& g = grid();
  if (n < 0 || n > basis_->n_max()) throw StructuralError("sector outside truncation");
  const std::size_t total = ipow(g.points, n);
  std::vector<cplx> values(total);
  const double inv_volume = 1.0 / std::pow(g.dx, 0.5 * n);
  std::vector<int> cells;
  for (std::size_t flat = 0; flat < total; ++flat) {
    decode_sorted(flat, n, g.points, cells);
    const std::size_t m = *basis_->find_sites(cells);
    values[flat] = amplitudes_[static_cast<Eigen::Index>(m)] * inv_volume /
                   std::sqrt(basis_->ordered_count(m));
  }
  return values;
}

Projection projection_onto(const FockBasis& basis, const LatticeConfig& q) {
  return ConfigProjection{lattice_index(basis, q)};
}

std::size_t lattice_index(const FockBasis& basis, const LatticeConfig& q) {
  if (static_cast<int>(q.occupation.size()) != basis.modes()) {
    throw StructuralError("lattice configuration has " + std::to_string(q.occupation.size()) +
                          " sites, basis has " + std::to_string(basis.modes()));
  }
  const auto idx = basis.find_occupation(q.occupation);
  if (!idx) throw StructuralError("lattice configuration is outside the truncated basis");
  return *idx;
}

LatticeConfig lattice_config(const FockBasis& basis, std::size_t index) {
  return LatticeConfig{basis.occupation(index)};
}

double norm_squared(const QuantumState& state) { return state.amplitudes().squaredNorm(); }

double project_expectation(const QuantumState& state, const Projection& p) {
  const FockBasis& basis = state.basis();
  return std::visit(
      [&](const auto& proj) -> double {
        using T = std::decay_t<decltype(proj)>;
        if constexpr (std::is_same_v<T, ConfigProjection>) {
          if (proj.index >= basis.size()) throw StructuralError("projection index outside basis");
          return std::norm(state.amplitude(proj.index));
        } else if constexpr (std::is_same_v<T, SectorProjection>) {
          if (proj.n < 0 || proj.n > basis.n_max()) {
            throw StructuralError("sector projection outside truncation");
          }
          return state.sector_probability(proj.n);
        } else {
          if (proj.n < 0 || proj.n > basis.n_max()) {
            throw StructuralError("cell projection sector outside truncation");
          }
          std::vector<std::size_t> indices;
          for (const auto& cell : proj.cells) {
            if (static_cast<int>(cell.size()) != proj.n) {
              throw StructuralError("cell tuple length does not match projection sector");
            }
            std::vector<int> sorted(cell.begin(), cell.end());
            std::sort(sorted.begin(), sorted.end());
            const auto idx = basis.find_sites(sorted);
            if (!idx) throw StructuralError("cell tuple outside the basis");
            indices.push_back(*idx);
          }
          std::sort(indices.begin(), indices.end());
          indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
          double sum = 0.0;
          for (auto i : indices) sum += std::norm(state.amplitude(i));
          return sum;
        }
      },
      p);
}

std::vector<double> born_density(const QuantumState& state, Normalization mode) {
  const double n2 = norm_squared(state);
  double scale = 1.0;
  if (std::abs(n2 - 1.0) > 1e-10) {
    if (mode == Normalization::Strict) {
      throw StructuralError("born_density needs a normalized state (norm^2 = " +
                            std::to_string(n2) + ")");
    }
    if (!(n2 > 0)) throw StructuralError("cannot normalize the zero state");
    scale = 1.0 / n2;
  }
  std::vector<double> out(state.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(state.amplitude(i)) * scale;
  return out;
}

nlohmann::json state_to_json(const QuantumState& state) {
  using nlohmann::json;
  const FockBasis& basis = state.basis();
  json doc;
  doc["kind"] = state.is_continuum() ? "grid" : "lattice";
  doc["modes"] = basis.modes();
  doc["n_max"] = basis.n_max();
  doc["dx"] = state.is_continuum() ? state.grid().dx : 1.0;
  doc["hbar"] = state.hbar();
  json sectors = json::array();
  for (int n = 0; n <= basis.n_max(); ++n) {
    json s;
    s["n"] = n;
    std::vector<double> re, im;
    if (state.is_continuum()) {
      s["shape"] = std::vector<int>(n, basis.modes());
      for (const cplx& v : state.sector_function(n)) {
        re.push_back(v.real());
        im.push_back(v.imag());
      }
    } else {
      s["shape"] = std::vector<std::size_t>{basis.sector_end(n) - basis.sector_begin(n)};
      for (std::size_t m = basis.sector_begin(n); m < basis.sector_end(n); ++m) {
        re.push_back(state.amplitude(m).real());
        im.push_back(state.amplitude(m).imag());
      }
    }
    s["re"] = re;
    s["im"] = im;
    sectors.push_back(std::move(s));
  }
  doc["sectors"] = std::move(sectors);
  return doc;
}

QuantumState state_from_json(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const int modes = doc.at("modes").get<int>();
    const int n_max = doc.at("n_max").get<int>();
    const double hbar = doc.value("hbar", 1.0);
    auto basis = std::make_shared<const FockBasis>(modes, n_max);
    if (kind == "grid") {
      const Grid grid{modes, doc.at("dx").get<double>()};
      std::vector<std::pair<int, std::vector<cplx>>> sectors;
      for (const auto& s : doc.at("sectors")) {
        const int n = s.at("n").get<int>();
        const auto re = s.at("re").get<std::vector<double>>();
        const auto im = s.at("im").get<std::vector<double>>();
        if (re.size() != im.size()) throw StructuralError("re/im length mismatch");
        std::vector<cplx> values(re.size());
        for (std::size_t i = 0; i < re.size(); ++i) values[i] = {re[i], im[i]};
        sectors.emplace_back(n, std::move(values));
      }
      return QuantumState::from_sector_functions(basis, grid, sectors, hbar);
    }
    if (kind == "lattice") {
      Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
      for (const auto& s : doc.at("sectors")) {
        const int n = s.at("n").get<int>();
        if (n < 0 || n > n_max) throw StructuralError("sector outside truncation");
        const auto re = s.at("re").get<std::vector<double>>();
        const auto im = s.at("im").get<std::vector<double>>();
        const std::size_t count = basis->sector_end(n) - basis->sector_begin(n);
        if (re.size() != count || im.size() != count) {
          throw StructuralError("lattice sector " + std::to_string(n) + " must hold " +
                                std::to_string(count) + " amplitudes");
        }
        for (std::size_t i = 0; i < count; ++i) {
          amps[static_cast<Eigen::Index>(basis->sector_begin(n) + i)] = {re[i], im[i]};
        }
      }
      return QuantumState(basis, std::move(amps), std::nullopt, hbar);
    }
    throw StructuralError("unknown state kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("malformed state snapshot: ") + e.what());
  }
}

}  // namespace pilotwave
