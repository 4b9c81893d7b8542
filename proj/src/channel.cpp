#include "irssec/channel.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "irssec/error.hpp"

namespace irssec {

Setup parse_setup(const std::string& tag) {
  if (tag == "a" || tag == "A") return Setup::A;
  if (tag == "b" || tag == "B") return Setup::B;
  throw InvalidInput("unknown setup tag '" + tag + "' (expected a or b)");
}

std::string to_string(Setup s) { return s == Setup::A ? "a" : "b"; }

void NodeGeometry::validate() const {
  if (eves.empty()) throw InvalidInput("geometry needs at least one eavesdropper");
  std::vector<Vec3> all{alice, rose, bob};
  all.insert(all.end(), eves.begin(), eves.end());
  // Eves may coincide with each other; every Alice/Rose/Bob pairing must not.
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if ((all[i] - all[j]).norm() <= 0.0) {
        throw InvalidInput("node positions must be distinct");
      }
    }
  }
}

std::vector<Vec3> place_uniform(const Vec3& from, const Vec3& to, int count) {
  if (count < 1) throw InvalidInput("eavesdropper count must be >= 1");
  if (count == 1) return {0.5 * (from + to)};
  std::vector<Vec3> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double s = static_cast<double>(k) / (count - 1);
    out.push_back(from + s * (to - from));
  }
  return out;
}

std::pair<Vec3, Vec3> eve_segment(Setup s) {
  if (s == Setup::A) return {Vec3(2, 95, 0), Vec3(2, 105, 0)};
  // Mirror image of the Setup (a) segment across y = 0, so eavesdropper k
  // of either setup is at the same distance from Alice.
  return {Vec3(2, -95, 0), Vec3(2, -105, 0)};
}

ChannelParams ChannelParams::defaults(Setup s) {
  ChannelParams p;
  if (s == Setup::B) p.re = LinkParams{5.0, 0.0};
  return p;
}

void ChannelParams::validate(int n_elements) const {
  if (!(carrier_freq > 0)) throw InvalidInput("carrier frequency must be positive");
  if (!(L0 > 0)) throw InvalidInput("L0 must be positive");
  for (const LinkParams* l : {&ab, &ae, &ar, &rb, &re}) {
    if (!(l->exponent >= 2.0)) throw InvalidInput("path-loss exponents must be >= 2");
    if (!(l->rician >= 0.0)) throw InvalidInput("Rician factors must be >= 0");
  }
  if (ura_rows < 1 || n_elements % ura_rows != 0) {
    std::ostringstream os;
    os << "ura_rows (" << ura_rows << ") must divide N (" << n_elements << ")";
    throw InvalidInput(os.str());
  }
}

ArrayLayout ArrayLayout::single() { return {{Vec3::Zero()}}; }

ArrayLayout ArrayLayout::ula_x(int count, double spacing) {
  ArrayLayout a;
  for (int m = 0; m < count; ++m) {
    a.offsets.emplace_back((m - 0.5 * (count - 1)) * spacing, 0.0, 0.0);
  }
  return a;
}

ArrayLayout ArrayLayout::ura_xz(int rows, int cols, double spacing) {
  ArrayLayout a;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      a.offsets.emplace_back((c - 0.5 * (cols - 1)) * spacing, 0.0,
                             (r - 0.5 * (rows - 1)) * spacing);
    }
  }
  return a;
}

double path_loss(double distance, double exponent, double L0) {
  if (!(distance > 0)) throw InvalidInput("path_loss: distance must be positive");
  return L0 * std::pow(distance, -exponent);
}

ComplexMatrix los_component(const Vec3& tx, const ArrayLayout& tx_layout, const Vec3& rx,
                            const ArrayLayout& rx_layout, double wavelength) {
  const Vec3 d = rx - tx;
  const double dist = d.norm();
  if (!(dist > 0)) throw InvalidInput("los_component: coincident positions");
  const Vec3 u_tx = d / dist;  // from tx towards rx
  const double k = 2.0 * std::numbers::pi / wavelength;

  ComplexVector a_rx(rx_layout.size());
  for (Eigen::Index i = 0; i < rx_layout.size(); ++i) {
    a_rx(i) = std::polar(1.0, k * rx_layout.offsets[i].dot(-u_tx));
  }
  ComplexVector a_tx(tx_layout.size());
  for (Eigen::Index j = 0; j < tx_layout.size(); ++j) {
    a_tx(j) = std::polar(1.0, k * tx_layout.offsets[j].dot(u_tx));
  }
  return a_rx * a_tx.transpose();
}

std::mt19937_64 ChannelRng::substream(std::uint64_t stream) const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

ComplexMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(gen);
      const double im = normal(gen);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

ComplexMatrix sample_channel(double gain, double rician, const ComplexMatrix& los,
                             std::mt19937_64& gen) {
  if (!(gain >= 0)) throw InvalidInput("sample_channel: gain must be non-negative");
  if (!(rician >= 0)) throw InvalidInput("sample_channel: Rician factor must be >= 0");
  const double amp = std::sqrt(gain);
  if (std::isinf(rician)) return amp * los;
  const double w_los = std::sqrt(rician / (1.0 + rician));
  const double w_nlos = std::sqrt(1.0 / (1.0 + rician));
  ComplexMatrix g = complex_gaussian(los.rows(), los.cols(), gen);
  return amp * (w_los * los + w_nlos * g);
}

ComplexMatrix assemble_composite(const ComplexMatrix& H_ar, const ComplexVector& h_ri,
                                 const ComplexVector& h_ai) {
  if (h_ri.size() != H_ar.rows() || h_ai.size() != H_ar.cols()) {
    std::ostringstream os;
    os << "assemble_composite: H_ar is " << H_ar.rows() << "x" << H_ar.cols() << ", h_ri has "
       << h_ri.size() << ", h_ai has " << h_ai.size();
    throw InvalidInput(os.str());
  }
  const Eigen::Index N = H_ar.rows();
  ComplexMatrix H(N + 1, H_ar.cols());
  H.topRows(N) = h_ri.conjugate().asDiagonal() * H_ar;
  H.row(N) = h_ai.adjoint();
  return H;
}

NodeGeometry resolve_geometry(const ChannelScenario& sc) {
  NodeGeometry g = sc.geometry;
  if (!sc.explicit_eves) {
    const auto [from, to] = eve_segment(sc.setup);
    g.eves = place_uniform(from, to, sc.K);
  }
  return g;
}

void assemble_all(ChannelSet& set) {
  set.H_b = assemble_composite(set.H_ar, set.h_rb, set.h_ab);
  set.H_e.clear();
  for (std::size_t k = 0; k < set.h_ae.size(); ++k) {
    set.H_e.push_back(assemble_composite(set.H_ar, set.h_re[k], set.h_ae[k]));
  }
}

namespace {

// Samples the row-vector convention h^H (1 x count) and returns h.
ComplexVector sample_link(const Vec3& tx, const ArrayLayout& tx_layout, const Vec3& rx,
                          const LinkParams& link, const ChannelParams& p, std::mt19937_64 gen) {
  const double gain = path_loss((rx - tx).norm(), link.exponent, p.L0);
  const ComplexMatrix los = los_component(tx, tx_layout, rx, ArrayLayout::single(), p.wavelength());
  const ComplexMatrix row = sample_channel(gain, link.rician, los, gen);
  return row.adjoint();
}

}  // namespace

ChannelSet build_scenario(const ChannelScenario& sc, const ChannelRng& rng) {
  if (sc.M < 1 || sc.N < 1 || sc.K < 1) throw InvalidInput("M, N, K must all be >= 1");
  sc.params.validate(sc.N);
  const NodeGeometry g = resolve_geometry(sc);
  if (static_cast<int>(g.eves.size()) != sc.K) {
    throw InvalidInput("explicit eavesdropper list does not match K");
  }
  g.validate();
  const ChannelParams& p = sc.params;

  const ArrayLayout tx = ArrayLayout::ula_x(sc.M, p.tx_spacing());
  const ArrayLayout irs = ArrayLayout::ura_xz(p.ura_rows, sc.N / p.ura_rows, p.irs_spacing());

  ChannelSet set;
  {
    const double gain = path_loss((g.rose - g.alice).norm(), p.ar.exponent, p.L0);
    const ComplexMatrix los = los_component(g.alice, tx, g.rose, irs, p.wavelength());
    auto gen = rng.substream(stream::kAliceRose);
    set.H_ar = sample_channel(gain, p.ar.rician, los, gen);
  }
  set.h_ab = sample_link(g.alice, tx, g.bob, p.ab, p, rng.substream(stream::kAliceBob));
  set.h_rb = sample_link(g.rose, irs, g.bob, p.rb, p, rng.substream(stream::kRoseBob));
  for (int k = 0; k < sc.K; ++k) {
    set.h_ae.push_back(
        sample_link(g.alice, tx, g.eves[k], p.ae, p, rng.substream(stream::kAliceEveBase + k)));
    set.h_re.push_back(
        sample_link(g.rose, irs, g.eves[k], p.re, p, rng.substream(stream::kRoseEveBase + k)));
  }
  assemble_all(set);
  return set;
}

}  // namespace irssec
