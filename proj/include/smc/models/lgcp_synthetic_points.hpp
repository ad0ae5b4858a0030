#pragma once

// Generated by data/make_lgcp_points.py (seed 20190417). Do not edit.

#include <array>
#include <utility>

namespace smc {

inline constexpr std::array<std::pair<double, double>, 126> kSyntheticLgcpPoints{{
    {0.494388, 0.494446},
    {0.943935, 0.526550},
    {0.960931, 0.617740},
    {0.211333, 0.395903},
    {0.907376, 0.770515},
    {0.564306, 0.127688},
    {0.348264, 0.743189},
    {0.888865, 0.260167},
    {0.484062, 0.962376},
    {0.301599, 0.072911},
    {0.024137, 0.079775},
    {0.889082, 0.802356},
    {0.647945, 0.522780},
    {0.141182, 0.779607},
    {0.128574, 0.874622},
    {0.539254, 0.588730},
    {0.613629, 0.750189},
    {0.474501, 0.532573},
    {0.963576, 0.608637},
    {0.698835, 0.036792},
    {0.038744, 0.424108},
    {0.288595, 0.057540},
    {0.027078, 0.032886},
    {0.159829, 0.287672},
    {0.880727, 0.302017},
    {0.293509, 0.973046},
    {0.272191, 0.503972},
    {0.189363, 0.983419},
    {0.546882, 0.244161},
    {0.612832, 0.552851},
    {0.834358, 0.437151},
    {0.453815, 0.449521},
    {0.176385, 0.341320},
    {0.563513, 0.154937},
    {0.589358, 0.141055},
    {0.860934, 0.176676},
    {0.954294, 0.822425},
    {0.130129, 0.596352},
    {0.295554, 0.096758},
    {0.560504, 0.099688},
    {0.118408, 0.607300},
    {0.250259, 0.284238},
    {0.339167, 0.928306},
    {0.712862, 0.508335},
    {0.728538, 0.414816},
    {0.470048, 0.211524},
    {0.007886, 0.475244},
    {0.547561, 0.608428},
    {0.310808, 0.931864},
    {0.324293, 0.505382},
    {0.009808, 0.296961},
    {0.578922, 0.129024},
    {0.950441, 0.600503},
    {0.154544, 0.322661},
    {0.502116, 0.090662},
    {0.287572, 0.932721},
    {0.313840, 0.195427},
    {0.526460, 0.723463},
    {0.596241, 0.552628},
    {0.553552, 0.344007},
    {0.406661, 0.440435},
    {0.165950, 0.607989},
    {0.939289, 0.820884},
    {0.289664, 0.123121},
    {0.879132, 0.693044},
    {0.458854, 0.118900},
    {0.440687, 0.214600},
    {0.928090, 0.790478},
    {0.910905, 0.665739},
    {0.787920, 0.447882},
    {0.271192, 0.433036},
    {0.801831, 0.344397},
    {0.282445, 0.260917},
    {0.411744, 0.621868},
    {0.630052, 0.877731},
    {0.801721, 0.680141},
    {0.654846, 0.573627},
    {0.869620, 0.816209},
    {0.581777, 0.564372},
    {0.540035, 0.300749},
    {0.544336, 0.632960},
    {0.465205, 0.826740},
    {0.004152, 0.991370},
    {0.127652, 0.668597},
    {0.346282, 0.945393},
    {0.608539, 0.075508},
    {0.961589, 0.553920},
    {0.775943, 0.428968},
    {0.319030, 0.225863},
    {0.179377, 0.818374},
    {0.636907, 0.160878},
    {0.112166, 0.287567},
    {0.133645, 0.066730},
    {0.028445, 0.160067},
    {0.403744, 0.113148},
    {0.308954, 0.933823},
    {0.616003, 0.077100},
    {0.263980, 0.460151},
    {0.658448, 0.845261},
    {0.143887, 0.892965},
    {0.760254, 0.527532},
    {0.987634, 0.556551},
    {0.402577, 0.272662},
    {0.557067, 0.468456},
    {0.400848, 0.653573},
    {0.984248, 0.780289},
    {0.202379, 0.379613},
    {0.318146, 0.701740},
    {0.353227, 0.333340},
    {0.909105, 0.770105},
    {0.258161, 0.904764},
    {0.569222, 0.925365},
    {0.297941, 0.174383},
    {0.000046, 0.382077},
    {0.304979, 0.072249},
    {0.216991, 0.744205},
    {0.007401, 0.841534},
    {0.113738, 0.363779},
    {0.249165, 0.958241},
    {0.196925, 0.495817},
    {0.776066, 0.524047},
    {0.818036, 0.458205},
    {0.468298, 0.806333},
    {0.957412, 0.782788},
    {0.960287, 0.542086},
    {0.299860, 0.097022},
}};

}  // namespace smc
