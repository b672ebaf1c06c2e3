#include "lpsdg/study.hpp"

int main(int argc, char** argv) { return lpsdg::study_main(argc, argv); }
