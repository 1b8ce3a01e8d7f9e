#include "fve/diffusion_window.hpp"

#include <cmath>

#include "fve/error.hpp"

namespace fve {

DiffusionWindow::DiffusionWindow(const KernelSpec& kernel, std::span<const double> positions, double t0,
                                 Rng& rng, FactorMethod method)
    : factor_(factor_noise(kernel, positions, method)), rng_(&rng) {
  anchors_.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    anchors_.push_back({positions[i], t0, factor_.group[i], 0u});
  }
  mark_time_.push_back(t0);
  path_.assign(factor_.rank(), 0.0);
}

void DiffusionWindow::advance(double t) {
  const double last = mark_time_.back();
  if (t < last) throw ArgumentError("DiffusionWindow: time went backwards");
  if (t == last) return;
  const std::size_t r = factor_.rank();
  const double s = std::sqrt(t - last);
  const std::size_t base = path_.size() - r;
  path_.resize(path_.size() + r);
  for (std::size_t l = 0; l < r; ++l) path_[base + r + l] = path_[base + l] + s * rng_->normal();
  mark_time_.push_back(t);
}

double DiffusionWindow::realize(Anchor& a, double t) {
  advance(t);
  const std::size_t r = factor_.rank();
  const auto now = static_cast<std::uint32_t>(mark_time_.size() - 1);
  double x = a.base;
  if (a.mark != now && r > 0) {
    const double* row = factor_.loadings.data() + static_cast<std::size_t>(a.row) * r;
    const double* cur = path_.data() + static_cast<std::size_t>(now) * r;
    const double* old = path_.data() + static_cast<std::size_t>(a.mark) * r;
    double dot = 0.0;
    for (std::size_t l = 0; l < r; ++l) dot += row[l] * (cur[l] - old[l]);
    x += dot;
  }
  if (factor_.epsilon > 0.0) {
    if (t > a.time) x += factor_.epsilon * std::sqrt(t - a.time) * rng_->normal();
    a.base = x;
    a.time = t;
    a.mark = now;
  }
  return x;
}

double DiffusionWindow::position(std::size_t j, double t) { return realize(anchors_.at(j), t); }

void DiffusionWindow::copy(std::size_t from, std::size_t to, double t) {
  if (factor_.epsilon > 0.0) {
    realize(anchors_.at(from), t);
  } else if (t < mark_time_.back()) {
    throw ArgumentError("DiffusionWindow: time went backwards");
  }
  anchors_.at(to) = anchors_.at(from);
}

std::size_t DiffusionWindow::duplicate(std::size_t from, double t) {
  anchors_.push_back(anchors_.at(from));
  copy(from, anchors_.size() - 1, t);
  return anchors_.size() - 1;
}

void DiffusionWindow::remove(std::size_t j) {
  if (j >= anchors_.size()) throw ArgumentError("DiffusionWindow::remove: index out of range");
  anchors_[j] = anchors_.back();
  anchors_.pop_back();
}

void DiffusionWindow::finish(double t1, std::vector<double>& out) {
  advance(t1);
  out.resize(anchors_.size());
  for (std::size_t i = 0; i < anchors_.size(); ++i) out[i] = realize(anchors_[i], t1);
}

}  // namespace fve
