#include "uip/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "uip/errors.hpp"
#include "uip/numerics.hpp"

namespace uip::model {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

BundleOption::BundleOption(std::vector<int> items) : items_(std::move(items)) {
  if (items_.empty()) throw InvalidOptionSet("empty option");
  std::vector<int> sorted = items_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidOptionSet("repeated item in option " + key());
  if (sorted.front() < 0) throw InvalidOptionSet("negative item index");
}

BundleOption::BundleOption(std::initializer_list<int> items) : BundleOption(std::vector<int>(items)) {}

bool BundleOption::contains(int item) const {
  return std::find(items_.begin(), items_.end(), item) != items_.end();
}

std::uint64_t BundleOption::item_mask() const {
  std::uint64_t m = 0;
  for (int i : items_) {
    if (i >= 64) throw DomainError("item index beyond 63 in mask");
    m |= std::uint64_t{1} << i;
  }
  return m;
}

std::string BundleOption::key() const {
  std::string s;
  for (std::size_t k = 0; k < items_.size(); ++k) {
    if (k) s += '-';
    s += std::to_string(items_[k]);
  }
  return s;
}

double option_salvage(const BundleOption& option, std::span<const Item> items) {
  double s = 0.0;
  for (int i : option.items()) s += items[static_cast<std::size_t>(i)].salvage;
  return s;
}

int OptionSet::bundle_count() const {
  return static_cast<int>(std::count_if(options.begin(), options.end(),
                                        [](const BundleOption& o) { return o.is_bundle(); }));
}

std::size_t OptionSet::bundled_items() const {
  std::size_t n = 0;
  for (const auto& o : options)
    if (o.is_bundle()) n += o.cardinality();
  return n;
}

void OptionSet::validate(std::size_t item_count, int max_bundles, int max_bundle_size) const {
  std::vector<int> seen(item_count, 0);
  for (const auto& o : options) {
    if (static_cast<int>(o.cardinality()) > max_bundle_size)
      throw InvalidOptionSet("option " + o.key() + " exceeds the maximum bundle size");
    for (int i : o.items()) {
      if (static_cast<std::size_t>(i) >= item_count) throw InvalidOptionSet("item index out of range in " + o.key());
      if (seen[static_cast<std::size_t>(i)]++) throw InvalidOptionSet("item " + std::to_string(i) + " appears twice");
    }
  }
  for (std::size_t i = 0; i < item_count; ++i)
    if (!seen[i]) throw InvalidOptionSet("item " + std::to_string(i) + " is not covered");
  if (bundle_count() > max_bundles) throw InvalidOptionSet("too many bundles");
}

OptionSet OptionSet::canonical() const {
  OptionSet c = *this;
  std::sort(c.options.begin(), c.options.end());
  return c;
}

OptionSet OptionSet::from_encoding(const std::string& text) {
  OptionSet set;
  std::vector<int> items;
  std::string num;
  auto flush_num = [&] {
    if (num.empty()) throw InvalidOptionSet("malformed option set encoding: " + text);
    items.push_back(std::stoi(num));
    num.clear();
  };
  for (char c : text + "|") {
    if (c >= '0' && c <= '9') {
      num += c;
    } else if (c == '-') {
      flush_num();
    } else if (c == '|') {
      flush_num();
      set.options.emplace_back(std::move(items));
      items.clear();
    } else if (c != ' ') {
      throw InvalidOptionSet("malformed option set encoding: " + text);
    }
  }
  return set;
}

std::string OptionSet::encoding() const {
  std::string s;
  const OptionSet c = canonical();
  for (std::size_t k = 0; k < c.options.size(); ++k) {
    if (k) s += '|';
    s += c.options[k].key();
  }
  return s;
}

OptionSet OptionSet::singletons(std::size_t item_count) {
  OptionSet s;
  for (std::size_t i = 0; i < item_count; ++i) s.options.emplace_back(std::vector<int>{static_cast<int>(i)});
  return s;
}

// Bounded (option, type) -> quality cache. Once full, new keys are computed but not stored.
class QualityMemo {
 public:
  explicit QualityMemo(std::size_t capacity) : capacity_(capacity) {}

  double get(const BundleOption& option, int type, const QualityFn& fn) {
    std::string key = option.key();
    key += '#';
    key += std::to_string(type);
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const double value = fn(option, type);
    std::unique_lock lock(mutex_);
    if (cache_.size() < capacity_) cache_.emplace(std::move(key), value);
    return value;
  }

 private:
  std::size_t capacity_;
  std::shared_mutex mutex_;
  std::unordered_map<std::string, double> cache_;
};

CustomerModel::CustomerModel()
    : CustomerModel({1.0}, -1.0, [](const BundleOption&, int) { return 0.0; }) {}

CustomerModel::CustomerModel(std::vector<double> pmf, double beta_p, QualityFn quality,
                             nlohmann::json quality_spec, std::size_t memo_capacity)
    : pmf_(std::move(pmf)), beta_p_(beta_p), quality_(std::move(quality)), spec_(std::move(quality_spec)) {
  if (pmf_.empty()) throw DomainError("customer model needs at least one type");
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0)) throw DomainError("negative type probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("type probabilities must sum to 1");
  if (beta_p_ == 0.0 || !std::isfinite(beta_p_)) throw DomainError("price sensitivity must be finite and non-zero");
  if (!quality_) throw DomainError("missing quality function");
  if (memo_capacity > 0) memo_ = std::make_shared<QualityMemo>(memo_capacity);
}

double CustomerModel::quality(const BundleOption& option, int type) const {
  if (type < 0 || static_cast<std::size_t>(type) >= pmf_.size()) throw DomainError("type out of range");
  if (memo_) return memo_->get(option, type, quality_);
  return quality_(option, type);
}

std::vector<double> CustomerModel::qualities(const BundleOption& option) const {
  std::vector<double> q(pmf_.size());
  for (std::size_t w = 0; w < q.size(); ++w) q[w] = quality(option, static_cast<int>(w));
  return q;
}

int MarketInstance::horizon() const {
  if (demand <= 0.0) return 0;
  return static_cast<int>(std::floor(demand / arrival_prob + 1e-9));
}

void MarketInstance::validate() const {
  if (!(arrival_prob > 0.0 && arrival_prob <= 1.0)) throw DomainError("arrival probability must lie in (0, 1]");
  if (!(demand >= 0.0) || !std::isfinite(demand)) throw DomainError("demand must be finite and non-negative");
  if (max_bundle_size < 1) throw DomainError("maximum bundle size must be at least 1");
  if (max_bundles < 0) throw DomainError("maximum bundle count must be non-negative");
  std::vector<int> ids;
  for (const auto& it : items) {
    if (!std::isfinite(it.salvage)) throw DomainError("salvage must be finite");
    ids.push_back(it.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DomainError("duplicate item id");
}

MarketInstance MarketInstance::with_horizon(int periods) const {
  MarketInstance m = *this;
  m.demand = periods * arrival_prob;
  while (m.horizon() < periods) m.demand = std::nextafter(m.demand, std::numeric_limits<double>::infinity());
  return m;
}

MarketInstance MarketInstance::with_demand(double lambda) const {
  MarketInstance m = *this;
  m.demand = lambda;
  return m;
}

std::vector<double> OptionTable::q_type(std::size_t w) const {
  std::vector<double> out(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) out[i] = q(i, w);
  return out;
}

OptionTable tabulate(const MarketInstance& instance, std::span<const BundleOption> options) {
  OptionTable t;
  t.options.assign(options.begin(), options.end());
  t.pmf = instance.customer.pmf();
  t.sign = instance.sign();
  t.beta = t.sign * instance.customer.beta_p();
  t.mu = instance.arrival_prob;
  t.horizon = instance.horizon();
  const std::size_t k = t.pmf.size();
  t.quality.resize(options.size() * k);
  t.salvage.resize(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) {
    for (int i2 : options[i].items())
      if (static_cast<std::size_t>(i2) >= instance.items.size()) throw DomainError("option refers to a missing item");
    for (std::size_t w = 0; w < k; ++w) t.quality[i * k + w] = instance.customer.quality(options[i], static_cast<int>(w));
    t.salvage[i] = t.sign * option_salvage(options[i], instance.items);
  }
  return t;
}

OptionTable tabulate(const MarketInstance& instance, const OptionSet& set) {
  return tabulate(instance, std::span<const BundleOption>(set.options));
}

ChoiceVector mnl_choice(std::span<const double> quality, double beta_p, std::span<const double> prices) {
  if (quality.size() != prices.size()) throw DimensionMismatch("quality and price vectors differ in length");
  const std::size_t n = quality.size();
  std::vector<double> v(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = quality[i] + beta_p * prices[i];
    if (std::isnan(v[i])) throw DomainError("NaN utility");
    m = std::max(m, v[i]);
  }
  ChoiceVector c;
  c.probs.resize(n);
  double denom = std::exp(-m);
  for (std::size_t i = 0; i < n; ++i) {
    c.probs[i] = std::exp(v[i] - m);
    denom += c.probs[i];
  }
  for (double& p : c.probs) p /= denom;
  c.outside = std::exp(-m) / denom;
  return c;
}

ChoiceVector mnl_choice(const MarketInstance& instance, const OptionSet& set, std::span<const double> prices,
                        int type) {
  std::vector<double> q(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) q[i] = instance.customer.quality(set.options[i], type);
  return mnl_choice(q, instance.customer.beta_p(), prices);
}

std::vector<double> extended_choice(std::span<const double> quality, double beta_p, std::span<const double> prices,
                                    std::span<const double> availability) {
  const std::size_t n = quality.size();
  if (prices.size() != n || availability.size() != n) throw DimensionMismatch("extended_choice input lengths differ");
  std::vector<double> v(n);
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (availability[i] < 0.0 || availability[i] > 1.0) throw DomainError("availability outside [0, 1]");
    v[i] = quality[i] + beta_p * prices[i];
    m = std::max(m, v[i]);
  }
  double common = std::exp(-m);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - m);
    common += availability[i] * v[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = v[i] / (common + (1.0 - availability[i]) * v[i]);
  return out;
}

std::vector<double> extended_choice(const MarketInstance& instance, const OptionSet& set,
                                    std::span<const double> prices, std::span<const double> availability, int type) {
  std::vector<double> q(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) q[i] = instance.customer.quality(set.options[i], type);
  return extended_choice(q, instance.customer.beta_p(), prices, availability);
}

double aggregated_quality(std::span<const double> qualities, std::span<const double> pmf) {
  return numerics::log_sum_exp(qualities, pmf);
}

double aggregated_quality(const BundleOption& option, const CustomerModel& customer) {
  const auto q = customer.qualities(option);
  return aggregated_quality(q, customer.pmf());
}

std::vector<BundleOption> enumerate_options(std::size_t item_count, int max_size, std::size_t cap) {
  // Count first so the cap is checked before allocating.
  std::size_t total = 0;
  {
    std::size_t perm = 1;
    for (int k = 1; k <= max_size && static_cast<std::size_t>(k) <= item_count; ++k) {
      perm *= item_count - static_cast<std::size_t>(k) + 1;
      total += perm;
      if (total > cap) throw CapExceeded("option count exceeds cap " + std::to_string(cap));
    }
  }
  std::vector<BundleOption> out;
  out.reserve(total);
  std::vector<int> seq;
  std::vector<char> used(item_count, 0);
  for (int len = 1; len <= max_size && static_cast<std::size_t>(len) <= item_count; ++len) {
    // Depth-first over positions yields lexicographic order within this length.
    std::function<void()> rec = [&] {
      if (static_cast<int>(seq.size()) == len) {
        out.emplace_back(seq);
        return;
      }
      for (std::size_t i = 0; i < item_count; ++i) {
        if (used[i]) continue;
        used[i] = 1;
        seq.push_back(static_cast<int>(i));
        rec();
        seq.pop_back();
        used[i] = 0;
      }
    };
    rec();
  }
  return out;
}

std::vector<BundleOption> enumerate_options(const MarketInstance& instance, std::size_t cap) {
  return enumerate_options(instance.item_count(), instance.max_bundle_size, cap);
}

}  // namespace uip::model
