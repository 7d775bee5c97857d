#include "spaqr/transform.hpp"

namespace spaqr {

namespace {

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

Vector gather(const Vector& x, const IndexSet& idx) {
  Vector out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

void scatter(Vector& x, const IndexSet& idx, const Vector& v) {
  for (size_t i = 0; i < idx.size(); ++i) x[idx[i]] = v[i];
}

}  // namespace

std::size_t payload(const Transform& t) {
  return std::visit(overloaded{
                        [](const BlockHouseholder& h) {
                          return h.panel.payload() + static_cast<std::size_t>(h.R.size() + h.Rsn.size());
                        },
                        [](const InterfaceScaling& s) { return s.U.payload() + static_cast<std::size_t>(s.R.size()); },
                        [](const Sparsifier& s) { return s.Q.payload(); },
                        [](const Permutation& p) { return p.from.size(); },
                    },
                    t);
}

void apply_qt(const Transform& t, Vector& x) {
  std::visit(overloaded{
                 [&](const BlockHouseholder& h) {
                   Vector v = gather(x, h.rows);
                   apply_panel_vec(h.panel, v.data(), true);
                   scatter(x, h.rows, v);
                 },
                 [&](const InterfaceScaling& s) {
                   Vector v = gather(x, s.rows);
                   apply_panel_vec(s.U, v.data(), true);
                   scatter(x, s.rows, v);
                 },
                 [&](const Sparsifier& s) {
                   if (s.rows.empty()) return;
                   Vector v = gather(x, s.rows);
                   apply_panel_vec(s.Q, v.data(), true);
                   scatter(x, s.rows, v);
                 },
                 [&](const Permutation& p) {
                   Vector v = gather(x, p.from);
                   scatter(x, p.to, v);
                 },
             },
             t);
}

void solve_w(const Transform& t, Vector& x) {
  std::visit(overloaded{
                 [&](const BlockHouseholder& h) {
                   Vector v = gather(x, h.cols);
                   if (!h.ncols.empty()) v.noalias() -= h.Rsn * gather(x, h.ncols);
                   h.R.triangularView<Eigen::Upper>().solveInPlace(v);
                   scatter(x, h.cols, v);
                 },
                 [&](const InterfaceScaling& s) {
                   Vector v = gather(x, s.cols);
                   s.R.triangularView<Eigen::Upper>().solveInPlace(v);
                   scatter(x, s.cols, v);
                 },
                 [&](const Sparsifier& s) {
                   Vector v = gather(x, s.cols);
                   apply_panel_vec(s.Q, v.data(), false);
                   scatter(x, s.cols, v);
                 },
                 [&](const Permutation&) {},
             },
             t);
}

void apply_w(const Transform& t, Vector& x) {
  std::visit(overloaded{
                 [&](const BlockHouseholder& h) {
                   Vector v = h.R.triangularView<Eigen::Upper>() * gather(x, h.cols);
                   if (!h.ncols.empty()) v.noalias() += h.Rsn * gather(x, h.ncols);
                   scatter(x, h.cols, v);
                 },
                 [&](const InterfaceScaling& s) {
                   Vector v = s.R.triangularView<Eigen::Upper>() * gather(x, s.cols);
                   scatter(x, s.cols, v);
                 },
                 [&](const Sparsifier& s) {
                   Vector v = gather(x, s.cols);
                   apply_panel_vec(s.Q, v.data(), true);
                   scatter(x, s.cols, v);
                 },
                 [&](const Permutation&) {},
             },
             t);
}

}  // namespace spaqr
