// Copyright 2026 The Reachfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REACHFUZZ_CLOCK_H_
#define REACHFUZZ_CLOCK_H_

#include <chrono>

namespace reachfuzz {

// Time source for the scheduler's cooldown. Times are in arbitrary units;
// only differences matter.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double Now() const = 0;
  // Reports `units` of work done by the caller. Virtual clocks advance by
  // it; the wall clock ignores it.
  virtual void Charge(double units) = 0;
};

// Seconds of a monotonic clock.
class WallClock : public Clock {
 public:
  double Now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void Charge(double) override {}

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Virtual time that only moves when told to. With a charge scale of 1 it
// measures the work reported through Charge(), which makes campaigns
// reproducible.
class ManualClock : public Clock {
 public:
  explicit ManualClock(double charge_scale = 1.0) : charge_scale_(charge_scale) {}
  double Now() const override { return now_; }
  void Charge(double units) override { now_ += units * charge_scale_; }
  void Advance(double units) { now_ += units; }

 private:
  double now_ = 0;
  double charge_scale_;
};

}  // namespace reachfuzz

#endif  // REACHFUZZ_CLOCK_H_
