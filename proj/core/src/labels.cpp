#include "ctxpath/labels.hpp"

#include <string>

#include "ctxpath/error.hpp"

namespace ctxpath {

std::string_view to_string(ClassLabel label) noexcept {
    switch (label) {
        case ClassLabel::Normal: return "normal";
        case ClassLabel::Benign: return "benign";
        case ClassLabel::InSitu: return "insitu";
        case ClassLabel::Invasive: return "invasive";
    }
    return "unknown";
}

std::string_view to_string(BinaryLabel label) noexcept {
    return label == BinaryLabel::NonCarcinoma ? "noncarcinoma" : "carcinoma";
}

ClassLabel parse_class_label(std::string_view name) {
    if (name == "normal") return ClassLabel::Normal;
    if (name == "benign") return ClassLabel::Benign;
    if (name == "insitu") return ClassLabel::InSitu;
    if (name == "invasive") return ClassLabel::Invasive;
    throw Error(ErrorCode::SchemaViolation, "unknown class label '" + std::string(name) + "'");
}

BinaryLabel to_two_class(ClassLabel label) noexcept {
    return label == ClassLabel::Normal || label == ClassLabel::Benign ? BinaryLabel::NonCarcinoma
                                                                       : BinaryLabel::Carcinoma;
}

std::string_view to_string(LabelScheme scheme) noexcept {
    return scheme == LabelScheme::FourClass ? "four_class" : "two_class";
}

LabelScheme parse_label_scheme(std::string_view name) {
    if (name == "four_class") return LabelScheme::FourClass;
    if (name == "two_class") return LabelScheme::TwoClass;
    throw Error(ErrorCode::SchemaViolation, "unknown label scheme '" + std::string(name) + "'");
}

std::vector<std::string> class_names(LabelScheme scheme) {
    if (scheme == LabelScheme::TwoClass) return {"noncarcinoma", "carcinoma"};
    return {"normal", "benign", "insitu", "invasive"};
}

int scheme_index(ClassLabel label, LabelScheme scheme) noexcept {
    return scheme == LabelScheme::TwoClass ? static_cast<int>(to_two_class(label))
                                           : static_cast<int>(label);
}

}  // namespace ctxpath
