#pragma once

// Nested Gauss-Patterson quadrature rules on [-1,1] in probabilists' scaling:
// weights sum to 1 under the uniform probability measure. Rule `index` has
// 2^index - 1 nodes and integrates polynomials exactly through degree
// 3*2^(index-1) - 1 (degree 1 for the one-point rule). Node j of every rule is
// kGaussPattersonNodes[j]; the shared sequence makes nesting exact by
// construction. Values generated by iterated Stieltjes extension at 160-digit
// precision and rounded to double.

#include <array>
#include <cstddef>

namespace pulseuq::detail {

inline constexpr int kGaussPattersonMaxIndex = 6;

inline constexpr std::array<double, 63> kGaussPattersonNodes = {
    0.0,  // first appears in rule 1
    -0.77459666924148338,  // first appears in rule 2
    0.77459666924148338,  // first appears in rule 2
    -0.96049126870802028,  // first appears in rule 3
    -0.43424374934680256,  // first appears in rule 3
    0.43424374934680256,  // first appears in rule 3
    0.96049126870802028,  // first appears in rule 3
    -0.99383196321275502,  // first appears in rule 4
    -0.88845923287225700,  // first appears in rule 4
    -0.62110294673722640,  // first appears in rule 4
    -0.22338668642896688,  // first appears in rule 4
    0.22338668642896688,  // first appears in rule 4
    0.62110294673722640,  // first appears in rule 4
    0.88845923287225700,  // first appears in rule 4
    0.99383196321275502,  // first appears in rule 4
    -0.99909812496766760,  // first appears in rule 5
    -0.98153114955374011,  // first appears in rule 5
    -0.92965485742974006,  // first appears in rule 5
    -0.83672593816886874,  // first appears in rule 5
    -0.70249620649152708,  // first appears in rule 5
    -0.53131974364437562,  // first appears in rule 5
    -0.33113539325797683,  // first appears in rule 5
    -0.11248894313318663,  // first appears in rule 5
    0.11248894313318663,  // first appears in rule 5
    0.33113539325797683,  // first appears in rule 5
    0.53131974364437562,  // first appears in rule 5
    0.70249620649152708,  // first appears in rule 5
    0.83672593816886874,  // first appears in rule 5
    0.92965485742974006,  // first appears in rule 5
    0.98153114955374011,  // first appears in rule 5
    0.99909812496766760,  // first appears in rule 5
    -0.99987288812035761,  // first appears in rule 6
    -0.99720625937222196,  // first appears in rule 6
    -0.98868475754742948,  // first appears in rule 6
    -0.97218287474858180,  // first appears in rule 6
    -0.94634285837340291,  // first appears in rule 6
    -0.91037115695700429,  // first appears in rule 6
    -0.86390793819369048,  // first appears in rule 6
    -0.80694053195021761,  // first appears in rule 6
    -0.73975604435269476,  // first appears in rule 6
    -0.66290966002478060,  // first appears in rule 6
    -0.57719571005204581,  // first appears in rule 6
    -0.48361802694584103,  // first appears in rule 6
    -0.38335932419873035,  // first appears in rule 6
    -0.27774982202182432,  // first appears in rule 6
    -0.16823525155220746,  // first appears in rule 6
    -0.056344313046592790,  // first appears in rule 6
    0.056344313046592790,  // first appears in rule 6
    0.16823525155220746,  // first appears in rule 6
    0.27774982202182432,  // first appears in rule 6
    0.38335932419873035,  // first appears in rule 6
    0.48361802694584103,  // first appears in rule 6
    0.57719571005204581,  // first appears in rule 6
    0.66290966002478060,  // first appears in rule 6
    0.73975604435269476,  // first appears in rule 6
    0.80694053195021761,  // first appears in rule 6
    0.86390793819369048,  // first appears in rule 6
    0.91037115695700429,  // first appears in rule 6
    0.94634285837340291,  // first appears in rule 6
    0.97218287474858180,  // first appears in rule 6
    0.98868475754742948,  // first appears in rule 6
    0.99720625937222196,  // first appears in rule 6
    0.99987288812035761,  // first appears in rule 6
};

inline constexpr std::array<double, 1> kGaussPattersonWeights1 = {
    1.0000000000000000,
};

inline constexpr std::array<double, 3> kGaussPattersonWeights2 = {
    0.44444444444444444, 0.27777777777777778, 0.27777777777777778,
};

inline constexpr std::array<double, 7> kGaussPattersonWeights3 = {
    0.22545826932923707, 0.13424404493416672, 0.13424404493416672,
    0.052328113013233633, 0.20069870738798111, 0.20069870738798111,
    0.052328113013233633,
};

inline constexpr std::array<double, 15> kGaussPattersonWeights4 = {
    0.11275524989910334, 0.067207627621892110, 0.067207627621892110,
    0.025801641498539870, 0.10031426468849451, 0.10031426468849451,
    0.025801641498539870, 0.0085008598149701302, 0.046463597657562269,
    0.085755954568195690, 0.10957842920079375, 0.10957842920079375,
    0.085755954568195690, 0.046463597657562269, 0.0085008598149701302,
};

inline constexpr std::array<double, 31> kGaussPattersonWeights5 = {
    0.056377628360384346, 0.033603877147995352, 0.033603877147995352,
    0.012903799048088327, 0.050157139305897789, 0.050157139305897789,
    0.012903799048088327, 0.0042172828696605531, 0.023231446630878993,
    0.042877960024995176, 0.054789210527962319, 0.054789210527962319,
    0.042877960024995176, 0.023231446630878993, 0.0042172828696605531,
    0.0012723903957809372, 0.0082230249271939055, 0.017978551653564661,
    0.028489754747061679, 0.038439810249501766, 0.046813554990632237,
    0.052834946790117405, 0.055978436510476728, 0.055978436510476728,
    0.052834946790117405, 0.046813554990632237, 0.038439810249501766,
    0.028489754747061679, 0.017978551653564661, 0.0082230249271939055,
    0.0012723903957809372,
};

inline constexpr std::array<double, 63> kGaussPattersonWeights6 = {
    0.028188814180192359, 0.016801938574103865, 0.016801938574103865,
    0.0064519000501756328, 0.025078569652949769, 0.025078569652949769,
    0.0064519000501756328, 0.0021088152207794274, 0.011615723319955135,
    0.021438980012503867, 0.027394605263981433, 0.027394605263981433,
    0.021438980012503867, 0.011615723319955135, 0.0021088152207794274,
    0.00063257827811503401, 0.0041115039786179648, 0.0089892757840641352,
    0.014244877372916774, 0.019219905124727766, 0.023406777495314006,
    0.026417473395058260, 0.027989218255238160, 0.027989218255238160,
    0.026417473395058260, 0.023406777495314006, 0.019219905124727766,
    0.014244877372916774, 0.0089892757840641352, 0.0041115039786179648,
    0.00063257827811503401, 0.00018161074092276533, 0.0012895248973428441,
    0.0030577534110586232, 0.0052491234548106609, 0.0077033752332797489,
    0.010297116957956356, 0.012934839663607373, 0.015536775555843982,
    0.018032216390391286, 0.020357755058472159, 0.022457265826816099,
    0.024282165203336599, 0.025791626976024229, 0.026952749667633032,
    0.027740702178279682, 0.028138849915627151, 0.028138849915627151,
    0.027740702178279682, 0.026952749667633032, 0.025791626976024229,
    0.024282165203336599, 0.022457265826816099, 0.020357755058472159,
    0.018032216390391286, 0.015536775555843982, 0.012934839663607373,
    0.010297116957956356, 0.0077033752332797489, 0.0052491234548106609,
    0.0030577534110586232, 0.0012895248973428441, 0.00018161074092276533,
};


inline constexpr int gp_rule_size(int index) { return (1 << index) - 1; }

/// Weights (in node-sequence order, summing to 1) of the nested rule `index`.
inline const double* gp_rule_weights(int index) {
  switch (index) {
    case 1: return kGaussPattersonWeights1.data();
    case 2: return kGaussPattersonWeights2.data();
    case 3: return kGaussPattersonWeights3.data();
    case 4: return kGaussPattersonWeights4.data();
    case 5: return kGaussPattersonWeights5.data();
    case 6: return kGaussPattersonWeights6.data();
    default: return nullptr;
  }
}

}  // namespace pulseuq::detail
