/*
 * Copyright 2026 the gridshare authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GRIDSHARE_COALITION_HPP
#define GRIDSHARE_COALITION_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridshare/billing.hpp"
#include "gridshare/money.hpp"
#include "gridshare/profiles.hpp"
#include "gridshare/rng.hpp"

namespace gridshare::coalition {

using billing::CaseLabel;
using billing::Tariff;
using profiles::HouseDay;

/// One day of a coalition: member ids plus summed energy aggregates.
struct CoalitionDay {
  std::vector<std::string> members;
  Date date;
  double peak_load_kwh = 0.0;
  double offpeak_load_kwh = 0.0;
  double peak_solar_kwh = 0.0;
  double offpeak_solar_kwh = 0.0;
  double storage_kwh = 0.0;
  double panel_area_m2 = 0.0;

  static CoalitionDay from_members(std::span<const HouseDay> houses) {
    if (houses.empty())
      throw std::invalid_argument("coalition must have at least one member");
    std::set<std::string> ids;
    // accumulate on the micro-kWh lattice so aggregates are exact sums
    std::int64_t pl = 0, ol = 0, ps = 0, os = 0, b = 0, a = 0;
    CoalitionDay c;
    c.date = houses.front().date;
    for (const auto& h : houses) {
      if (!ids.insert(h.house_id).second)
        throw std::invalid_argument("duplicate coalition member: " + h.house_id);
      if (h.date != c.date)
        throw std::invalid_argument("coalition members must share one date");
      c.members.push_back(h.house_id);
      pl += to_micro_kwh(h.peak_load_kwh);
      ol += to_micro_kwh(h.offpeak_load_kwh);
      ps += to_micro_kwh(h.peak_solar_kwh);
      os += to_micro_kwh(h.offpeak_solar_kwh);
      b += to_micro_kwh(h.storage_kwh);
      a += to_micro_kwh(h.panel_area_m2);
    }
    auto kwh = [](std::int64_t micro) {
      return static_cast<double>(micro) / static_cast<double>(kMicroPerKwh);
    };
    c.peak_load_kwh = kwh(pl);
    c.offpeak_load_kwh = kwh(ol);
    c.peak_solar_kwh = kwh(ps);
    c.offpeak_solar_kwh = kwh(os);
    c.storage_kwh = kwh(b);
    c.panel_area_m2 = kwh(a);
    return c;
  }
};

namespace detail {

inline billing::detail::NetPosition net_position(const CoalitionDay& c) {
  billing::detail::NetPosition n;
  n.peak_micro = to_micro_kwh(c.peak_load_kwh) - to_micro_kwh(c.storage_kwh) -
                 to_micro_kwh(c.peak_solar_kwh);
  n.offpeak_micro = to_micro_kwh(c.offpeak_load_kwh) + to_micro_kwh(c.storage_kwh) -
                    to_micro_kwh(c.offpeak_solar_kwh);
  return n;
}

}  // namespace detail

/// Daily coalition cost: the net-metering bill evaluated on the pooled
/// aggregates (pooled storage discharges over the peak period and recharges
/// over the off-peak period, like a single large household).
inline Money coalition_cost(const CoalitionDay& c, const Tariff& t,
                            bool include_amortization = false) {
  auto n = detail::net_position(c);
  Money cost =
      billing::detail::period_cost(t.peak_buy(), t.peak_sell(), n.peak_micro) +
      billing::detail::period_cost(t.offpeak_buy(), t.offpeak_sell(), n.offpeak_micro);
  if (include_amortization) {
    cost += Money::from_units(
        t.storage_amortization().centicents() * to_micro_kwh(c.storage_kwh) +
        t.panel_amortization().centicents() * to_micro_kwh(c.panel_area_m2));
  }
  return cost;
}

/// Coalition cost in plain double arithmetic (cents), amortization excluded.
/// The algebraic property checks (positive homogeneity) run on this kernel.
inline double coalition_cost_real(double peak_load, double offpeak_load,
                                  double peak_solar, double offpeak_solar,
                                  double storage, const Tariff& t) {
  double peak_net = peak_load - storage - peak_solar;
  double offpeak_net = offpeak_load + storage - offpeak_solar;
  return billing::detail::period_cost_real(t.peak_buy().cents(),
                                           t.peak_sell().cents(), peak_net) +
         billing::detail::period_cost_real(t.offpeak_buy().cents(),
                                           t.offpeak_sell().cents(), offpeak_net);
}

/// Network trading prices: the grid buy price when the network as a whole is
/// in deficit for the period (equality included), the grid sell price when it
/// holds surplus.
inline std::pair<Price, Price> sharing_prices(const CoalitionDay& c, const Tariff& t) {
  auto n = detail::net_position(c);
  Price peak = n.peak_micro >= 0 ? t.peak_buy() : t.peak_sell();
  Price offpeak = n.offpeak_micro >= 0 ? t.offpeak_buy() : t.offpeak_sell();
  return {peak, offpeak};
}

/// Per-house cost shares of the grand coalition for one day.
struct Allocation {
  Date date;
  std::vector<std::pair<std::string, Money>> shares;  // member order
  CaseLabel case_label = CaseLabel::K;
  Money grand_cost;
  Price peak_price, offpeak_price;

  Money share_of(const std::string& house_id) const {
    for (const auto& [id, m] : shares)
      if (id == house_id) return m;
    throw std::invalid_argument("no share for house " + house_id);
  }
};

/// Analytical allocation: every house settles its own net positions at the
/// network prices of the day's case. Summed over members this reproduces the
/// grand-coalition cost exactly (integer arithmetic end to end).
inline Allocation allocate(const CoalitionDay& c, std::span<const HouseDay> houses,
                           const Tariff& t, bool include_amortization = false) {
  if (houses.size() != c.members.size())
    throw std::invalid_argument("allocate: member list mismatch");
  {
    std::set<std::string> want(c.members.begin(), c.members.end());
    for (const auto& h : houses)
      if (!want.erase(h.house_id))
        throw std::invalid_argument("allocate: house '" + h.house_id +
                                    "' is not a coalition member");
    if (!want.empty())
      throw std::invalid_argument("allocate: missing member house data");
  }

  Allocation alloc;
  alloc.date = c.date;
  auto grand_net = detail::net_position(c);
  alloc.case_label = grand_net.case_label();
  auto [peak_price, offpeak_price] = sharing_prices(c, t);
  alloc.peak_price = peak_price;
  alloc.offpeak_price = offpeak_price;
  alloc.grand_cost = coalition_cost(c, t, include_amortization);

  Money total;
  for (const auto& h : houses) {
    auto n = billing::detail::net_position(h);
    Money share = Money::from_units(peak_price.centicents() * n.peak_micro +
                                    offpeak_price.centicents() * n.offpeak_micro);
    if (include_amortization) share += billing::detail::amortization(t, h);
    total += share;
    alloc.shares.emplace_back(h.house_id, share);
  }
  if (total != alloc.grand_cost)
    throw std::logic_error("allocation does not sum to the coalition cost");
  return alloc;
}

// ---------------------------------------------------------------------------
// Peer-to-peer trade matching
// ---------------------------------------------------------------------------

inline constexpr std::int64_t kTradeQuantumMicro = 1000;  // 0.001 kWh

struct Trade {
  std::string seller;
  std::string buyer;
  double kwh = 0.0;
  Price price;
};

struct PeriodSettlement {
  Price price;                          // network price of the period
  std::vector<Trade> trades;
  std::vector<double> grid_purchase_kwh;  // per house, input order
  std::vector<double> grid_sale_kwh;
};

struct TradeLedger {
  Date date;
  std::vector<std::string> house_ids;  // input order
  PeriodSettlement peak;
  PeriodSettlement offpeak;
};

namespace detail {

/// Pro-rata split of `total` over `weights` (all micro-kWh, weights > 0),
/// floored to the trade quantum with largest-remainder top-up; no entry
/// exceeds its weight. Quanta that cannot be placed stay unassigned.
inline std::vector<std::int64_t> prorate(std::int64_t total,
                                         const std::vector<std::int64_t>& weights) {
  std::int64_t weight_sum = 0;
  for (auto w : weights) weight_sum += w;
  std::vector<std::int64_t> out(weights.size(), 0);
  if (weight_sum == 0 || total <= 0) return out;

  std::int64_t quanta = total / kTradeQuantumMicro;  // trade in whole quanta
  std::int64_t assigned = 0;
  std::vector<std::pair<__int128, std::size_t>> remainders;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    __int128 target = static_cast<__int128>(quanta) * weights[i];
    std::int64_t base = static_cast<std::int64_t>(target / weight_sum);
    out[i] = base * kTradeQuantumMicro;
    assigned += base;
    remainders.push_back({target % weight_sum, i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::int64_t leftover = quanta - assigned;
  for (const auto& [rem, i] : remainders) {
    if (leftover <= 0) break;
    if (out[i] + kTradeQuantumMicro <= weights[i]) {
      out[i] += kTradeQuantumMicro;
      --leftover;
    }
  }
  return out;
}

inline double micro_to_kwh(std::int64_t micro) {
  return static_cast<double>(micro) / static_cast<double>(kMicroPerKwh);
}

inline PeriodSettlement settle_period(const std::vector<std::string>& ids,
                                      const std::vector<std::int64_t>& net_micro,
                                      Price network_price) {
  const std::size_t n = ids.size();
  PeriodSettlement s;
  s.price = network_price;
  s.grid_purchase_kwh.assign(n, 0.0);
  s.grid_sale_kwh.assign(n, 0.0);

  std::vector<std::int64_t> deficit(n, 0), surplus(n, 0);
  std::int64_t total_deficit = 0, total_surplus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (net_micro[i] > 0) {
      deficit[i] = net_micro[i];
      total_deficit += net_micro[i];
    } else {
      surplus[i] = -net_micro[i];
      total_surplus += -net_micro[i];
    }
  }

  std::int64_t traded = std::min(total_deficit, total_surplus);
  std::vector<std::int64_t> bought = prorate(traded, deficit);
  std::vector<std::int64_t> sold = prorate(traded, surplus);
  std::int64_t bought_total = std::accumulate(bought.begin(), bought.end(), std::int64_t{0});
  std::int64_t sold_total = std::accumulate(sold.begin(), sold.end(), std::int64_t{0});
  // prorate floors both sides to the same quantum count; trim to the smaller
  // total so internal purchases equal internal sales.
  std::int64_t matched = std::min(bought_total, sold_total);
  auto trim = [&](std::vector<std::int64_t>& v, std::int64_t excess) {
    for (std::size_t i = n; i-- > 0 && excess > 0;) {
      std::int64_t cut = std::min(excess, v[i]);
      v[i] -= cut;
      excess -= cut;
    }
  };
  trim(bought, bought_total - matched);
  trim(sold, sold_total - matched);

  // explicit seller->buyer flows: two-pointer sweep in house order
  std::size_t bi = 0;
  std::int64_t buyer_left = 0;
  for (std::size_t si = 0; si < n; ++si) {
    std::int64_t to_place = sold[si];
    while (to_place > 0) {
      while (buyer_left == 0) {
        if (bi >= n) throw std::logic_error("trade matching imbalance");
        buyer_left = bought[bi];
        if (buyer_left == 0) ++bi;
      }
      std::int64_t amount = std::min(to_place, buyer_left);
      s.trades.push_back(
          Trade{ids[si], ids[bi], micro_to_kwh(amount), network_price});
      to_place -= amount;
      buyer_left -= amount;
      if (buyer_left == 0) ++bi;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (deficit[i] > 0)
      s.grid_purchase_kwh[i] = micro_to_kwh(deficit[i] - bought[i]);
    if (surplus[i] > 0) s.grid_sale_kwh[i] = micro_to_kwh(surplus[i] - sold[i]);
  }
  return s;
}

}  // namespace detail

/// Realizes the sharing mechanism as explicit energy flows: surplus houses
/// sell to deficit houses pro-rata (by position size) at the network price,
/// residuals settle with the grid at the tariff prices. The implied per-house
/// payments reproduce the analytical allocation to within trade rounding.
inline TradeLedger match_trades(std::span<const HouseDay> houses, const Tariff& t) {
  if (houses.empty()) throw std::invalid_argument("match_trades: empty house list");
  CoalitionDay c = CoalitionDay::from_members(houses);
  auto [peak_price, offpeak_price] = sharing_prices(c, t);

  TradeLedger ledger;
  ledger.date = c.date;
  std::vector<std::int64_t> peak_net, offpeak_net;
  for (const auto& h : houses) {
    ledger.house_ids.push_back(h.house_id);
    auto n = billing::detail::net_position(h);
    peak_net.push_back(n.peak_micro);
    offpeak_net.push_back(n.offpeak_micro);
  }
  ledger.peak = detail::settle_period(ledger.house_ids, peak_net, peak_price);
  ledger.offpeak = detail::settle_period(ledger.house_ids, offpeak_net, offpeak_price);
  return ledger;
}

/// Per-house payments implied by a trade ledger (no amortization): peer trades
/// at the network price plus grid residuals at the tariff prices.
inline std::vector<Money> implied_payments(const TradeLedger& ledger, const Tariff& t) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ledger.house_ids.size(); ++i)
    index[ledger.house_ids[i]] = i;
  std::vector<Money> pay(ledger.house_ids.size());

  auto apply = [&](const PeriodSettlement& s, Price buy, Price sell) {
    for (const auto& trade : s.trades) {
      Money value = energy_cost(trade.price, trade.kwh);
      pay[index.at(trade.buyer)] += value;
      pay[index.at(trade.seller)] -= value;
    }
    for (std::size_t i = 0; i < pay.size(); ++i) {
      pay[i] += energy_cost(buy, s.grid_purchase_kwh[i]);
      pay[i] -= energy_cost(sell, s.grid_sale_kwh[i]);
    }
  };
  apply(ledger.peak, t.peak_buy(), t.peak_sell());
  apply(ledger.offpeak, t.offpeak_buy(), t.offpeak_sell());
  return pay;
}

enum class ImportMode { individual, coalition };

struct GridImport {
  double peak_kwh = 0.0;
  double offpeak_kwh = 0.0;
};

/// Energy drawn from the grid per period: each house clamps its own deficit
/// (individual mode) or the pooled network clamps the aggregate (coalition).
inline GridImport grid_import(std::span<const HouseDay> houses, ImportMode mode) {
  if (houses.empty()) throw std::invalid_argument("grid_import: empty house list");
  std::int64_t peak = 0, offpeak = 0;
  if (mode == ImportMode::individual) {
    for (const auto& h : houses) {
      auto n = billing::detail::net_position(h);
      peak += std::max<std::int64_t>(n.peak_micro, 0);
      offpeak += std::max<std::int64_t>(n.offpeak_micro, 0);
    }
  } else {
    CoalitionDay c = CoalitionDay::from_members(houses);
    auto n = detail::net_position(c);
    peak = std::max<std::int64_t>(n.peak_micro, 0);
    offpeak = std::max<std::int64_t>(n.offpeak_micro, 0);
  }
  return GridImport{detail::micro_to_kwh(peak), detail::micro_to_kwh(offpeak)};
}

// ---------------------------------------------------------------------------
// Executable game-property checks
// ---------------------------------------------------------------------------

struct PropertyReport {
  long long checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string to_json() const {
    std::string out = "{\"checked\": " + std::to_string(checked) +
                      ", \"violations\": [";
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) out += ", ";
      out += "\"" + violations[i] + "\"";
    }
    out += "]}";
    return out;
  }
};

inline constexpr Money kMoneyTolerance = Money::from_units(100);  // 1e-6 cent

/// Random household-day instances for the property checks; deterministic for
/// a fixed seed.
class InstanceSampler {
 public:
  explicit InstanceSampler(std::uint64_t seed, double max_energy_kwh = 40.0,
                           double max_storage_kwh = 12.0,
                           double max_panel_m2 = 30.0)
      : rng_(seed),
        max_energy_(max_energy_kwh),
        max_storage_(max_storage_kwh),
        max_panel_(max_panel_m2) {}

  HouseDay draw_house(const std::string& id, Date date = Date{2021, 6, 1}) {
    return profiles::make_house_day(
        id, date, rng_.uniform(0, max_energy_), rng_.uniform(0, max_energy_),
        rng_.uniform(0, max_energy_), rng_.uniform(0, max_energy_),
        rng_.uniform(0, max_storage_), rng_.uniform(0, max_panel_));
  }

  std::vector<HouseDay> draw_houses(int n, Date date = Date{2021, 6, 1}) {
    std::vector<HouseDay> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
      out.push_back(draw_house("S" + std::to_string(i + 1), date));
    return out;
  }

  /// Valid tariff: four draws sorted ascending map to
  /// offpeak_sell <= offpeak_buy <= peak_sell <= peak_buy.
  Tariff draw_tariff(double max_price_cents = 100.0) {
    double a = rng_.uniform(0.01, max_price_cents);
    double b = rng_.uniform(0.01, max_price_cents);
    double c = rng_.uniform(0.01, max_price_cents);
    double d = rng_.uniform(0.01, max_price_cents);
    std::vector<double> v{a, b, c, d};
    std::sort(v.begin(), v.end());
    return Tariff(v[3], v[1], v[2], v[0]);
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return rng_.uniform_int(lo, hi);
  }

 private:
  Rng rng_;
  double max_energy_, max_storage_, max_panel_;
};

/// Draws disjoint coalitions S, T and checks C(S) + C(T) >= C(S u T).
inline PropertyReport check_subadditivity(InstanceSampler& sampler, const Tariff& t,
                                          int trials) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  PropertyReport report;
  for (int trial = 0; trial < trials; ++trial) {
    int ns = static_cast<int>(sampler.uniform_int(1, 6));
    int nt = static_cast<int>(sampler.uniform_int(1, 6));
    std::vector<HouseDay> all = sampler.draw_houses(ns + nt);
    std::span<const HouseDay> s(all.data(), ns);
    std::span<const HouseDay> u(all.data() + ns, nt);
    Money cs = coalition_cost(CoalitionDay::from_members(s), t);
    Money ct = coalition_cost(CoalitionDay::from_members(u), t);
    Money cu = coalition_cost(CoalitionDay::from_members(all), t);
    ++report.checked;
    if (cs + ct + kMoneyTolerance < cu) {
      std::ostringstream os;
      os << "trial " << trial << ": C(S)+C(T) = " << (cs + ct).cents_string()
         << " < C(SuT) = " << cu.cents_string();
      report.violations.push_back(os.str());
    }
  }
  return report;
}

/// Exhaustive core check (N <= 12): efficiency, individual rationality and
/// sum_{i in S} xi(i) <= C(S) for every non-empty coalition S.
inline PropertyReport check_core(std::span<const HouseDay> houses, const Tariff& t,
                                 bool include_amortization = false) {
  const int n = static_cast<int>(houses.size());
  if (n < 1) throw std::invalid_argument("check_core: empty house list");
  if (n > 12) throw std::invalid_argument("check_core: enumeration bound is 12 houses");

  PropertyReport report;
  CoalitionDay grand = CoalitionDay::from_members(houses);
  Allocation alloc = allocate(grand, houses, t, include_amortization);

  if (alloc.grand_cost != coalition_cost(grand, t, include_amortization))
    report.violations.push_back("efficiency: allocation total != C(N)");
  ++report.checked;

  for (int i = 0; i < n; ++i) {
    Money standalone =
        billing::cost_with_der(houses[i], t, include_amortization).cost;
    ++report.checked;
    if (alloc.shares[i].second > standalone + kMoneyTolerance) {
      report.violations.push_back("individual rationality: house " +
                                  houses[i].house_id);
    }
  }

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<HouseDay> subset;
    Money share_sum;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        subset.push_back(houses[i]);
        share_sum += alloc.shares[i].second;
      }
    }
    Money subset_cost =
        coalition_cost(CoalitionDay::from_members(subset), t, include_amortization);
    ++report.checked;
    if (share_sum > subset_cost + kMoneyTolerance) {
      std::ostringstream os;
      os << "core: coalition mask " << mask
         << " blocked, shares = " << share_sum.cents_string()
         << " > C(S) = " << subset_cost.cents_string();
      report.violations.push_back(os.str());
    }
  }
  return report;
}

/// Positive homogeneity of the cost function: C(alpha*S) = alpha*C(S) with all
/// energy aggregates and storage scaled (amortization excluded); evaluated on
/// the real-valued kernel at 1e-9 relative tolerance.
inline PropertyReport check_homogeneity(const CoalitionDay& c, const Tariff& t,
                                        double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  PropertyReport report;
  double base = coalition_cost_real(c.peak_load_kwh, c.offpeak_load_kwh,
                                    c.peak_solar_kwh, c.offpeak_solar_kwh,
                                    c.storage_kwh, t);
  double scaled = coalition_cost_real(
      alpha * c.peak_load_kwh, alpha * c.offpeak_load_kwh, alpha * c.peak_solar_kwh,
      alpha * c.offpeak_solar_kwh, alpha * c.storage_kwh, t);
  ++report.checked;
  double err = std::fabs(scaled - alpha * base);
  double scale = std::max(1.0, std::fabs(alpha * base));
  if (err > 1e-9 * scale) {
    std::ostringstream os;
    os << "homogeneity: |C(aS) - aC(S)| = " << err << " at alpha = " << alpha;
    report.violations.push_back(os.str());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

inline std::string to_allocations_csv(const std::vector<Allocation>& allocations) {
  std::string out = "date,house_id,xi_cents,case,pi_h,pi_l\n";
  for (const auto& a : allocations) {
    for (const auto& [id, share] : a.shares) {
      out += gridshare::to_string(a.date) + "," + id + "," + share.cents_string() +
             "," + billing::to_string(a.case_label) + "," +
             a.peak_price.cents_string() + "," + a.offpeak_price.cents_string() +
             "\n";
    }
  }
  return out;
}

inline std::string to_ledger_csv(const std::vector<TradeLedger>& ledgers) {
  std::string out = "date,period,seller,buyer,kwh,price\n";
  for (const auto& l : ledgers) {
    auto emit = [&](const PeriodSettlement& s, const char* period) {
      for (const auto& tr : s.trades) {
        out += gridshare::to_string(l.date) + "," + period + "," + tr.seller + "," +
               tr.buyer + "," + csv::format_fixed(tr.kwh, 3) + "," +
               tr.price.cents_string() + "\n";
      }
    };
    emit(l.peak, "peak");
    emit(l.offpeak, "off_peak");
  }
  return out;
}

}  // namespace gridshare::coalition

#endif  // GRIDSHARE_COALITION_HPP
