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

#ifndef GRIDSHARE_BILLING_HPP
#define GRIDSHARE_BILLING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridshare/money.hpp"
#include "gridshare/profiles.hpp"

namespace gridshare::billing {

/// Net-metering tariff with time-of-use pricing. Buying from the grid costs
/// peak_buy / offpeak_buy, selling back pays peak_sell / offpeak_sell, all in
/// cents per kWh. The pricing conditions peak_buy >= peak_sell,
/// offpeak_buy >= offpeak_sell and peak_sell >= offpeak_buy are enforced by
/// the constructor; without_pricing_checks() skips the ordering checks for
/// adversarial experiments. Amortization prices (storage: cents per kWh-day,
/// panel: cents per m2-day) default to zero.
class Tariff {
 public:
  Tariff(double peak_buy_cents, double offpeak_buy_cents, double peak_sell_cents,
         double offpeak_sell_cents, double storage_amortization_cents = 0.0,
         double panel_amortization_cents = 0.0)
      : Tariff(make(peak_buy_cents, offpeak_buy_cents, peak_sell_cents,
                    offpeak_sell_cents, storage_amortization_cents,
                    panel_amortization_cents, true)) {}

  static Tariff without_pricing_checks(double peak_buy_cents,
                                       double offpeak_buy_cents,
                                       double peak_sell_cents,
                                       double offpeak_sell_cents,
                                       double storage_amortization_cents = 0.0,
                                       double panel_amortization_cents = 0.0) {
    return make(peak_buy_cents, offpeak_buy_cents, peak_sell_cents,
                offpeak_sell_cents, storage_amortization_cents,
                panel_amortization_cents, false);
  }

  Price peak_buy() const { return peak_buy_; }
  Price offpeak_buy() const { return offpeak_buy_; }
  Price peak_sell() const { return peak_sell_; }
  Price offpeak_sell() const { return offpeak_sell_; }
  Price storage_amortization() const { return storage_amortization_; }
  Price panel_amortization() const { return panel_amortization_; }

 private:
  Tariff() = default;

  static Tariff make(double lh, double ll, double mh, double ml, double lb,
                     double la, bool enforce_ordering) {
    Tariff t;
    t.peak_buy_ = Price::from_cents(lh);
    t.offpeak_buy_ = Price::from_cents(ll);
    t.peak_sell_ = Price::from_cents(mh);
    t.offpeak_sell_ = Price::from_cents(ml);
    t.storage_amortization_ = Price::from_cents(lb);
    t.panel_amortization_ = Price::from_cents(la);
    if (enforce_ordering) {
      if (t.peak_buy_ < t.peak_sell_)
        throw std::invalid_argument("tariff: peak buy price must be >= peak sell price");
      if (t.offpeak_buy_ < t.offpeak_sell_)
        throw std::invalid_argument(
            "tariff: off-peak buy price must be >= off-peak sell price");
      if (t.peak_sell_ < t.offpeak_buy_)
        throw std::invalid_argument(
            "tariff: peak sell price must be >= off-peak buy price");
    }
    return t;
  }

  Price peak_buy_, offpeak_buy_, peak_sell_, offpeak_sell_;
  Price storage_amortization_, panel_amortization_;
};

/// Sign pattern of the two daily net positions. Peak-deficit means
/// consumption >= storage + generation for the peak period; the off-peak
/// position counts storage as extra consumption (it recharges overnight).
/// Equality lands on the deficit side.
enum class CaseLabel { K, L, M, N };

inline std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::K: return "K";
    case CaseLabel::L: return "L";
    case CaseLabel::M: return "M";
    default: return "N";
  }
}

inline CaseLabel classify_case(bool peak_deficit, bool offpeak_deficit) {
  if (peak_deficit) return offpeak_deficit ? CaseLabel::K : CaseLabel::M;
  return offpeak_deficit ? CaseLabel::L : CaseLabel::N;
}

namespace detail {

/// Net positions on the micro-kWh lattice: peak = load - storage - solar,
/// off-peak = load + storage - solar. Positive means energy bought.
struct NetPosition {
  std::int64_t peak_micro = 0;
  std::int64_t offpeak_micro = 0;

  CaseLabel case_label() const {
    return classify_case(peak_micro >= 0, offpeak_micro >= 0);
  }
};

inline NetPosition net_position(const profiles::HouseDay& h) {
  NetPosition n;
  n.peak_micro = to_micro_kwh(h.peak_load_kwh) - to_micro_kwh(h.storage_kwh) -
                 to_micro_kwh(h.peak_solar_kwh);
  n.offpeak_micro = to_micro_kwh(h.offpeak_load_kwh) + to_micro_kwh(h.storage_kwh) -
                    to_micro_kwh(h.offpeak_solar_kwh);
  return n;
}

/// One period of the net-metering bill: buy price on a positive net position,
/// sell price on a negative one. Equals buy*(net)+ - sell*(-net)+.
inline Money period_cost(Price buy, Price sell, std::int64_t net_micro) {
  return Money::from_units((net_micro >= 0 ? buy : sell).centicents() * net_micro);
}

inline Money amortization(const Tariff& t, const profiles::HouseDay& h) {
  return Money::from_units(
      t.storage_amortization().centicents() * to_micro_kwh(h.storage_kwh) +
      t.panel_amortization().centicents() * to_micro_kwh(h.panel_area_m2));
}

/// Same bill in plain double arithmetic (cents); used by the algebraic
/// property checks, which are about the cost function rather than the
/// fixed-point ledger.
inline double period_cost_real(double buy_cents, double sell_cents, double net_kwh) {
  return (net_kwh >= 0 ? buy_cents : sell_cents) * net_kwh;
}

}  // namespace detail

struct DailyBill {
  std::string house_id;
  Date date;
  Money cost;
  CaseLabel case_label = CaseLabel::K;
};

/// Daily cost with no storage or solar: buy every kWh at the period's price.
inline Money cost_without_der(const profiles::HouseDay& h, const Tariff& t) {
  return Money::from_units(
      t.peak_buy().centicents() * to_micro_kwh(h.peak_load_kwh) +
      t.offpeak_buy().centicents() * to_micro_kwh(h.offpeak_load_kwh));
}

/// Daily net-metering cost with storage and solar. Storage is dispatched the
/// fixed way: fully discharged over the peak period, fully recharged over the
/// off-peak period. Negative results are net credits.
inline DailyBill cost_with_der(const profiles::HouseDay& h, const Tariff& t,
                               bool include_amortization = false) {
  detail::NetPosition n = detail::net_position(h);
  Money cost = detail::period_cost(t.peak_buy(), t.peak_sell(), n.peak_micro) +
               detail::period_cost(t.offpeak_buy(), t.offpeak_sell(), n.offpeak_micro);
  if (include_amortization) cost += detail::amortization(t, h);
  return DailyBill{h.house_id, h.date, cost, n.case_label()};
}

inline std::string to_bills_csv(const std::vector<DailyBill>& bills) {
  std::string out = "house_id,date,cost_cents,case\n";
  for (const auto& b : bills) {
    out += b.house_id + "," + gridshare::to_string(b.date) + "," +
           b.cost.cents_string() + "," + to_string(b.case_label) + "\n";
  }
  return out;
}

}  // namespace gridshare::billing

#endif  // GRIDSHARE_BILLING_HPP
