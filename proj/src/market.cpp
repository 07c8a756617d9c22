#include "evprice/market.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "evprice/errors.hpp"
#include "evprice/stats.hpp"

namespace evprice {

SlotGrid::SlotGrid(int n_slots, double slot_length_hours)
    : n_slots_(n_slots), slot_length_hours_(slot_length_hours) {
  if (n_slots < 1) throw ConfigError("slot count must be >= 1");
  if (!(slot_length_hours > 0.0) || !std::isfinite(slot_length_hours))
    throw ConfigError("slot length must be positive");
}

int SlotGrid::steps_per_slot(int timesteps) const {
  if (timesteps < 1 || timesteps % n_slots_ != 0)
    throw ConfigError("timesteps (" + std::to_string(timesteps) +
                      ") must be a positive multiple of the slot count (" +
                      std::to_string(n_slots_) + ")");
  return timesteps / n_slots_;
}

Product::Product(int first_slot, int length, int n_slots)
    : first_slot_(first_slot), length_(length), n_slots_(n_slots) {
  if (n_slots < 1 || length < 1 || first_slot < 0 || first_slot + length > n_slots)
    throw std::domain_error("product must be a non-empty contiguous run inside the slot grid");
}

Product Product::from_incidence(std::span<const int> incidence) {
  int first = -1;
  int last = -1;
  for (std::size_t j = 0; j < incidence.size(); ++j) {
    const int v = incidence[j];
    if (v != 0 && v != 1) throw std::domain_error("incidence entries must be 0 or 1");
    if (v == 1) {
      if (first < 0) first = static_cast<int>(j);
      else if (last != static_cast<int>(j) - 1)
        throw std::domain_error("incidence must be one contiguous run");
      last = static_cast<int>(j);
    }
  }
  if (first < 0) throw std::domain_error("incidence must use at least one slot");
  return Product(first, last - first + 1, static_cast<int>(incidence.size()));
}

std::vector<int> Product::incidence() const {
  std::vector<int> v(static_cast<std::size_t>(n_slots_), 0);
  for (int j = first_slot_; j <= last_slot(); ++j) v[static_cast<std::size_t>(j)] = 1;
  return v;
}

ProductCatalog::ProductCatalog(int n_slots) : n_slots_(n_slots) {
  if (n_slots < 1) throw ConfigError("slot count must be >= 1");
  products_.reserve(static_cast<std::size_t>(n_slots * (n_slots + 1) / 2));
  for (int s = 0; s < n_slots; ++s)
    for (int len = 1; s + len <= n_slots; ++len) products_.emplace_back(s, len, n_slots);
}

std::size_t ProductCatalog::index_of(const Product& p) const {
  if (p.n_slots() != n_slots_) throw std::domain_error("product is over a different slot grid");
  const int s = p.first_slot();
  // sum_{i < s} (n - i) products start before slot s
  const int offset = s * n_slots_ - s * (s - 1) / 2;
  return static_cast<std::size_t>(offset + p.length() - 1);
}

CapacityVector::CapacityVector(std::vector<int> remaining) : remaining_(std::move(remaining)) {
  for (int c : remaining_)
    if (c < 0) throw std::domain_error("capacity must be non-negative");
}

bool CapacityVector::fits(const Product& p) const {
  if (static_cast<std::size_t>(p.n_slots()) != remaining_.size()) return false;
  for (int j = p.first_slot(); j <= p.last_slot(); ++j)
    if (remaining_[static_cast<std::size_t>(j)] < 1) return false;
  return true;
}

void CapacityVector::reserve(const Product& p) {
  if (!fits(p)) throw ContractViolation("reservation exceeds remaining capacity");
  for (int j = p.first_slot(); j <= p.last_slot(); ++j) --remaining_[static_cast<std::size_t>(j)];
}

PriceGrid::PriceGrid(std::vector<double> unit_rates) : rates_(std::move(unit_rates)) {
  if (rates_.empty()) throw ConfigError("price grid must not be empty");
  for (std::size_t i = 0; i < rates_.size(); ++i) {
    if (!std::isfinite(rates_[i]) || rates_[i] <= 0.0)
      throw ConfigError("price grid rates must be finite and positive");
    if (i > 0 && rates_[i] <= rates_[i - 1])
      throw ConfigError("price grid rates must be strictly ascending");
  }
}

PriceGrid PriceGrid::linspace(double min_rate, double max_rate, double step) {
  if (!(step > 0.0) || !(max_rate >= min_rate))
    throw ConfigError("price grid needs step > 0 and max >= min");
  std::vector<double> rates;
  const auto n = static_cast<long>(std::floor((max_rate - min_rate) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    // round to 12 significant decimals so 0.1 * 3 prints as 0.3
    const double r = min_rate + static_cast<double>(i) * step;
    rates.push_back(std::round(r * 1e12) / 1e12);
  }
  return PriceGrid(std::move(rates));
}

double PriceGrid::rate(Action a) const {
  if (a.is_reject()) return std::numeric_limits<double>::infinity();
  return rates_.at(static_cast<std::size_t>(a.index()));
}

double PriceGrid::total_price(Action a, const Product& p, const SlotGrid& grid) const {
  return rate(a) * p.duration_hours(grid);
}

double BudgetModel::cdf(double rate) const {
  if (rate <= floor) return 0.0;
  const double lower = normal_cdf((floor - mean) / sd);
  const double mass = 1.0 - lower;
  return (normal_cdf((rate - mean) / sd) - lower) / mass;
}

double BudgetModel::sample(Rng& rng) const {
  std::normal_distribution<double> dist(mean, sd);
  for (;;) {
    const double r = dist(rng);
    if (r > floor) return r;
  }
}

void InstanceConfig::validate() const {
  if (capacity < 1) throw ConfigError("capacity must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  if (timesteps < 1) throw ConfigError("timesteps must be >= 1");
  if (lambda > timesteps)
    throw ConfigError("timesteps must be at least lambda so per-step probabilities stay <= 1");
  slots.steps_per_slot(timesteps);
  if (!(duration_mean_hours > 0.0)) throw ConfigError("duration mean must be positive");
  if (!(start_sd_hours > 0.0)) throw ConfigError("start-time sd must be positive");
  if (!(budget.sd > 0.0)) throw ConfigError("budget sd must be positive");
  if (!std::isfinite(budget.floor) || !std::isfinite(budget.mean))
    throw ConfigError("budget parameters must be finite");
  if (normal_cdf((budget.floor - budget.mean) / budget.sd) > 1.0 - 1e-12)
    throw ConfigError("budget floor leaves no probability mass");
}

std::vector<double> start_slot_distribution(const InstanceConfig& cfg) {
  const int n = cfg.slots.n_slots();
  const double len = cfg.slots.slot_length_hours();
  std::vector<double> p(static_cast<std::size_t>(n));
  auto cdf = [&](double h) { return normal_cdf((h - cfg.start_mean_hours) / cfg.start_sd_hours); };
  for (int s = 0; s < n; ++s) {
    const double lo = s == 0 ? 0.0 : cdf(s * len);
    const double hi = s == n - 1 ? 1.0 : cdf((s + 1) * len);
    p[static_cast<std::size_t>(s)] = hi - lo;
  }
  return p;
}

std::vector<double> length_distribution(const InstanceConfig& cfg, int start_slot) {
  const int max_len = cfg.slots.n_slots() - start_slot;
  const double x = cfg.slots.slot_length_hours() / cfg.duration_mean_hours;
  std::vector<double> p(static_cast<std::size_t>(max_len));
  // ceil(E / L) = j  <=>  (j - 1) L < E <= j L
  for (int j = 1; j < max_len; ++j)
    p[static_cast<std::size_t>(j - 1)] = std::exp(-(j - 1) * x) - std::exp(-j * x);
  p[static_cast<std::size_t>(max_len - 1)] = std::exp(-(max_len - 1) * x);
  return p;
}

IntensityVector product_intensities(const InstanceConfig& cfg) {
  const ProductCatalog catalog(cfg.slots.n_slots());
  const auto starts = start_slot_distribution(cfg);
  std::vector<double> rates(catalog.size(), 0.0);
  for (int s = 0; s < cfg.slots.n_slots(); ++s) {
    const auto lengths = length_distribution(cfg, s);
    for (std::size_t j = 0; j < lengths.size(); ++j) {
      const Product p(s, static_cast<int>(j) + 1, cfg.slots.n_slots());
      rates[catalog.index_of(p)] = cfg.lambda * starts[static_cast<std::size_t>(s)] * lengths[j];
    }
  }
  return IntensityVector(std::move(rates));
}

namespace {

Request draw_request(const InstanceConfig& cfg, Rng& rng, int step, double hours) {
  const int n = cfg.slots.n_slots();
  const double len = cfg.slots.slot_length_hours();
  std::normal_distribution<double> start_dist(cfg.start_mean_hours, cfg.start_sd_hours);
  std::exponential_distribution<double> dur_dist(1.0 / cfg.duration_mean_hours);

  const double start_h = start_dist(rng);
  const int first = std::clamp(static_cast<int>(std::floor(start_h / len)), 0, n - 1);
  const double dur_h = dur_dist(rng);
  const int wanted = std::max(1, static_cast<int>(std::ceil(dur_h / len)));
  const int length = std::min(wanted, n - first);

  Request r{Product(first, length, n), step, hours, 0.0};
  r.budget = cfg.budget.sample(rng) * r.product.duration_hours(cfg.slots);
  return r;
}

}  // namespace

RequestSequence generate_sequence(const InstanceConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RequestSequence seq;
  seq.seed = seed;
  seq.n_slots = cfg.slots.n_slots();
  if (cfg.lambda == 0.0) return seq;

  Rng rng = make_rng(seed);
  const int k = cfg.timesteps;
  const double step_h = cfg.slots.horizon_hours() / k;

  if (cfg.mode == ArrivalMode::discrete) {
    const DiscreteDemandProcess arrivals(IntensityVector({cfg.lambda}), cfg.discretization());
    // 1-based die-roll index t maps to 0-based MDP timestep t - 1
    int t = 0;
    while (auto delta = arrivals.sample_interarrival(t, rng)) {
      t += *delta;
      seq.requests.push_back(draw_request(cfg, rng, t - 1, (t - 1) * step_h));
    }
  } else {
    std::exponential_distribution<double> gap(cfg.lambda / cfg.slots.horizon_hours());
    double tau = gap(rng);
    while (tau < cfg.slots.horizon_hours()) {
      const int step = std::min(k - 1, static_cast<int>(std::floor(tau / step_h)));
      seq.requests.push_back(draw_request(cfg, rng, step, tau));
      tau += gap(rng);
    }
  }
  return seq;
}

bool feasible(const CapacityVector& capacity, const Product& product, int t,
              const SlotGrid& slots, int timesteps) {
  return t < slots.deadline_step(product.first_slot(), timesteps) && capacity.fits(product);
}

std::optional<Action> floor_to_grid(double budget, const PriceGrid& grid, double duration_hours) {
  if (!(duration_hours > 0.0)) throw std::domain_error("duration must be positive");
  std::optional<Action> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Action a(static_cast<int>(i));
    if (grid.rate(a) * duration_hours <= budget) best = a;
    else break;
  }
  return best;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

void write_sequence(std::ostream& os, const RequestSequence& seq) {
  os << "# evprice-sequence v1\n";
  os << "# seed=" << seq.seed << "\n";
  os << "# n_slots=" << seq.n_slots << "\n";
  os << "# arrival_timestep continuous_time_hours first_slot n_slots_requested budget\n";
  for (const auto& r : seq.requests) {
    os << r.arrival_step << ' ' << format_double(r.arrival_hours) << ' '
       << r.product.first_slot() << ' ' << r.product.length() << ' '
       << format_double(r.budget) << '\n';
  }
}

namespace {

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("malformed number in sequence file: " + s);
  return v;
}

}  // namespace

RequestSequence read_sequence(std::istream& is) {
  RequestSequence seq;
  std::string line;
  bool have_slots = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# seed=", 0) == 0) seq.seed = std::stoull(line.substr(7));
      if (line.rfind("# n_slots=", 0) == 0) {
        seq.n_slots = std::stoi(line.substr(10));
        have_slots = true;
      }
      continue;
    }
    if (!have_slots) throw ConfigError("sequence file lacks the n_slots header");
    std::istringstream fields(line);
    std::string step, hours, first, len, budget, extra;
    if (!(fields >> step >> hours >> first >> len >> budget) || (fields >> extra))
      throw ConfigError("malformed sequence record: " + line);
    Request r{Product(std::stoi(first), std::stoi(len), seq.n_slots), std::stoi(step),
              parse_double(hours), parse_double(budget)};
    if (!seq.requests.empty() && r.arrival_step < seq.requests.back().arrival_step)
      throw ConfigError("sequence records must be in arrival order");
    seq.requests.push_back(r);
  }
  return seq;
}

}  // namespace evprice
