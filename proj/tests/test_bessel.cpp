#include <doctest.h>

#include <cmath>

#include "nanofiber/bessel.hpp"

using namespace nanofiber;

namespace {

struct Reference {
  double x, j0, j1, j2, k0, k1, k2;
};

// 40-digit mpmath reference values spanning the argument range the mode
// solver touches (u up to ~V for a 10-wavelength radius, w likewise).
const Reference kReference[] = {
    {0.05, 0.99937509764946858, 0.024992188313759699, 0.00031243490091938443,
     3.1142340294719899, 19.909674325882507, 799.50120706477225},
    {0.1, 0.99750156206604003, 0.049937526036241998, 0.0012489586587999188,
     2.4270690247020166, 9.8538447808706061, 199.50396464211414},
    {0.25, 0.98443592929585270, 0.12402597732272692, 0.0077718892859626769,
     1.5415067512483028, 3.7470259744407116, 31.517714546773996},
    {0.5, 0.93846980724081290, 0.24226845767487389, 0.030604023458682641,
     0.92441907122766586, 1.6564411200033009, 7.5501835512408694},
    {0.8, 0.84628735275048027, 0.36884204609416999, 0.075817762484944719,
     0.56534710526589567, 0.86178163447218035, 2.7198011914463465},
    {1.0, 0.76519768655796655, 0.44005058574493352, 0.11490348493190048,
     0.42102443824070833, 0.60190723019723457, 1.6248388986351775},
    {1.5, 0.51182767173591813, 0.55793650791009964, 0.23208767214421473,
     0.21380556264752574, 0.27738780045684382, 0.58365596325665082},
    {1.65003502, 0.42677177330875846, 0.57434710460005369, 0.26939175975377459,
     0.17632703038772441, 0.22436658698971009, 0.44828075775735332},
    {2.0, 0.22389077914123567, 0.57672480775687339, 0.35283402861563772,
     0.11389387274953344, 0.13986588181652243, 0.25375975456605586},
    {3.0, -0.26005195490193344, 0.33905895852593646, 0.48609126058589108,
     0.034739504386279248, 0.040156431128194184, 0.061510458471742038},
    {4.5, -0.32054250898512142, -0.23106043192337063, 0.21784898368584559,
     0.0063998572432339750, 0.0070780949089680897, 0.0095456772027753482},
    {6.0, 0.15064525725099693, -0.27668385812756561, -0.24287320996018547,
     0.0012439943280131231, 0.0013439197177355090, 0.0016919675672582928},
    {8.0, 0.17165080713755391, 0.23463634685391462, -0.11299172042407525,
     0.00014647070522281539, 0.00015536921180500113, 0.00018531300817406567},
    {12.0, 0.047689310796833537, -0.22344710449062761, -0.084930494878604805,
     2.2008253973114914e-6, 2.2907574647671878e-6, 2.5826183081060227e-6},
    {18.0, -0.013355805721984111, -0.18799488548806959, -0.0075325148878013996,
     4.4687533373093829e-9, 4.5912496277402409e-9, 4.9788921848360764e-9},
    {25.0, 0.096266783275958116, -0.12535024958028990, -0.10629480324238131,
     3.4641615622131144e-12, 3.5327780731999338e-12, 3.7467838080691091e-12},
    {40.0, 0.0073668905842372896, 0.12603831803758500, -0.0010649746823580396,
     8.3928611000995670e-19, 8.4971319548610387e-19, 8.8177176978426190e-19},
    {55.0, -0.074548302648236823, -0.078250038308684659, 0.071702846709739199,
     2.1913102183534151e-25, 2.2111422716117465e-25, 2.2717153918665695e-25},
    {66.2, -0.083046174826235358, 0.051524755861057472, 0.084602813976116248,
     2.7322617216021437e-30, 2.7528213576242830e-30, 2.8154285299895843e-30},
    {70.0, 0.094908726483013542, 0.0099877887848385152, -0.094623361089161013,
     5.9446613372925022e-32, 5.9869736739138568e-32, 6.1157177279757552e-32},
};

double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

}  // namespace

TEST_CASE("bessel kernel matches high-precision references to 1e-10") {
  for (const auto& r : kReference) {
    CAPTURE(r.x);
    CHECK(rel_err(bessel::j0(r.x), r.j0) < 1e-10);
    CHECK(rel_err(bessel::j1(r.x), r.j1) < 1e-10);
    CHECK(rel_err(bessel::j2(r.x), r.j2) < 1e-10);
    CHECK(rel_err(bessel::k0(r.x), r.k0) < 1e-10);
    CHECK(rel_err(bessel::k1(r.x), r.k1) < 1e-10);
    CHECK(rel_err(bessel::k2(r.x), r.k2) < 1e-10);
  }
}

TEST_CASE("bessel derivatives agree with central differences") {
  // The recurrences are exact; this guards against wiring mistakes.
  for (const double x : {0.3, 0.9, 1.65, 2.2, 4.0, 7.5, 13.0}) {
    const double step = 1e-6 * x;
    CAPTURE(x);
    CHECK(bessel::dj0(x) ==
          doctest::Approx((bessel::j0(x + step) - bessel::j0(x - step)) / (2 * step))
              .epsilon(1e-7));
    CHECK(bessel::dj1(x) ==
          doctest::Approx((bessel::j1(x + step) - bessel::j1(x - step)) / (2 * step))
              .epsilon(1e-7));
    CHECK(bessel::dk1(x) ==
          doctest::Approx((bessel::k1(x + step) - bessel::k1(x - step)) / (2 * step))
              .epsilon(1e-7));
    CHECK(bessel::dk2(x) ==
          doctest::Approx((bessel::k2(x + step) - bessel::k2(x - step)) / (2 * step))
              .epsilon(1e-7));
  }
}

TEST_CASE("K-function Wronskian identity") {
  // K1(x) I1(x)' + K1'(x) I1(x) ... use the simpler pair identity
  // K0(x) K2(x) - K1(x)^2 > 0 (log-convexity in the order), a cheap sanity
  // check of relative magnitudes across the range.
  for (const double x : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 60.0}) {
    CAPTURE(x);
    CHECK(bessel::k0(x) * bessel::k2(x) > bessel::k1(x) * bessel::k1(x));
  }
}
