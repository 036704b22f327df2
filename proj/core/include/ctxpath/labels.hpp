#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ctxpath {

enum class ClassLabel : std::uint8_t { Normal, Benign, InSitu, Invasive };
enum class BinaryLabel : std::uint8_t { NonCarcinoma, Carcinoma };

inline constexpr int kClassLabelCount = 4;

std::string_view to_string(ClassLabel label) noexcept;
std::string_view to_string(BinaryLabel label) noexcept;
ClassLabel parse_class_label(std::string_view name);  // lowercase names, throws SchemaViolation

BinaryLabel to_two_class(ClassLabel label) noexcept;

// The label set a model is trained on. Labels inside the SVM and in reports
// are indices into class_names(scheme).
enum class LabelScheme : std::uint8_t { FourClass, TwoClass };

std::string_view to_string(LabelScheme scheme) noexcept;
LabelScheme parse_label_scheme(std::string_view name);
std::vector<std::string> class_names(LabelScheme scheme);
int scheme_index(ClassLabel label, LabelScheme scheme) noexcept;

}  // namespace ctxpath
