#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "irssec/numerics.hpp"

namespace irssec {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kInfiniteRician = std::numeric_limits<double>::infinity();

enum class Setup { A, B };

Setup parse_setup(const std::string& tag);
std::string to_string(Setup s);

struct NodeGeometry {
  Vec3 alice{5.0, 0.0, 20.0};
  Vec3 rose{0.0, 100.0, 2.0};
  Vec3 bob{3.0, 100.0, 0.0};
  std::vector<Vec3> eves;

  void validate() const;
};

/// K eavesdroppers spaced uniformly on [from, to], endpoints included;
/// K = 1 sits at the midpoint.
std::vector<Vec3> place_uniform(const Vec3& from, const Vec3& to, int count);

/// Default eavesdropper segment for each setup.
std::pair<Vec3, Vec3> eve_segment(Setup s);

struct LinkParams {
  double exponent = 2.0;
  double rician = 0.0;  // kInfiniteRician for pure LoS
};

struct ChannelParams {
  double carrier_freq = 750e6;
  double L0 = 1e-3;  // -30 dB at 1 m
  LinkParams ab{5.0, 0.0};
  LinkParams ae{5.0, 0.0};
  LinkParams ar{3.5, 0.0};
  LinkParams rb{2.0, kInfiniteRician};
  LinkParams re{2.0, kInfiniteRician};
  int ura_rows = 5;
  double element_spacing = 0.0;  // <= 0 selects 3*lambda/8
  double alice_spacing = 0.0;    // <= 0 selects lambda/2

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double irs_spacing() const { return element_spacing > 0 ? element_spacing : 0.375 * wavelength(); }
  double tx_spacing() const { return alice_spacing > 0 ? alice_spacing : 0.5 * wavelength(); }

  /// Default link parameters with the Rose-Eve link set for the given setup.
  static ChannelParams defaults(Setup s);
  void validate(int n_elements) const;
};

/// Element offsets relative to the node position.
struct ArrayLayout {
  std::vector<Vec3> offsets;

  Eigen::Index size() const { return static_cast<Eigen::Index>(offsets.size()); }

  static ArrayLayout single();
  /// Uniform linear array along x, centred on the node.
  static ArrayLayout ula_x(int count, double spacing);
  /// rows x cols grid in the x-z plane (rows along z, columns along x),
  /// row-major element order, centred on the node.
  static ArrayLayout ura_xz(int rows, int cols, double spacing);
};

/// Linear power gain L0 * d^-exponent.
double path_loss(double distance, double exponent, double L0);

/// Deterministic far-field LoS matrix of shape (rx elements) x (tx elements).
/// Entry (i, j) = exp(j k <p_rx_i, u_rx->tx>) * exp(j k <p_tx_j, u_tx->rx>).
ComplexMatrix los_component(const Vec3& tx, const ArrayLayout& tx_layout, const Vec3& rx,
                            const ArrayLayout& rx_layout, double wavelength);

/// Seedable generator with one independent substream per channel tensor.
class ChannelRng {
 public:
  explicit ChannelRng(std::uint64_t seed) : seed_(seed) {}
  /// Substream `stream` is std::mt19937_64 seeded by
  /// seed_seq{seed lo32, seed hi32, stream lo32, stream hi32}.
  std::mt19937_64 substream(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Stream ids used by build_scenario.
namespace stream {
inline constexpr std::uint64_t kAliceRose = 1;
inline constexpr std::uint64_t kAliceBob = 2;
inline constexpr std::uint64_t kRoseBob = 3;
inline constexpr std::uint64_t kAliceEveBase = 100;  // + k
inline constexpr std::uint64_t kRoseEveBase = 200;   // + k
}  // namespace stream

/// i.i.d. CN(0, 1) matrix.
ComplexMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen);

/// sqrt(gain) * (sqrt(b/(1+b)) los + sqrt(1/(1+b)) g_nlos).
ComplexMatrix sample_channel(double gain, double rician, const ComplexMatrix& los,
                             std::mt19937_64& gen);

/// [diag(h_ri^H) H_ar ; h_ai^H], shape (N+1) x M.
ComplexMatrix assemble_composite(const ComplexMatrix& H_ar, const ComplexVector& h_ri,
                                 const ComplexVector& h_ai);

struct ChannelSet {
  ComplexMatrix H_ar;               // N x M
  ComplexVector h_ab;               // M
  ComplexVector h_rb;               // N
  std::vector<ComplexVector> h_ae;  // K x M
  std::vector<ComplexVector> h_re;  // K x N
  ComplexMatrix H_b;                // (N+1) x M
  std::vector<ComplexMatrix> H_e;   // K x (N+1) x M

  Eigen::Index antennas() const { return H_ar.cols(); }
  Eigen::Index elements() const { return H_ar.rows(); }
  std::size_t eves() const { return H_e.size(); }
};

struct ChannelScenario {
  int M = 4;
  int N = 20;
  int K = 5;
  Setup setup = Setup::A;
  NodeGeometry geometry;  // eves ignored unless explicit_eves
  bool explicit_eves = false;
  ChannelParams params = ChannelParams::defaults(Setup::A);
};

/// Resolved node positions (eves placed per setup unless given explicitly).
NodeGeometry resolve_geometry(const ChannelScenario& sc);

ChannelSet build_scenario(const ChannelScenario& sc, const ChannelRng& rng);

/// Assemble H_b and H_e from the raw links of `set`.
void assemble_all(ChannelSet& set);

}  // namespace irssec
