#pragma once

#include "mcfse/baselines.hpp"
#include "mcfse/common.hpp"
#include "mcfse/evaluate.hpp"
#include "mcfse/fft.hpp"
#include "mcfse/fse.hpp"
#include "mcfse/loss.hpp"
#include "mcfse/motion.hpp"
#include "mcfse/pipeline.hpp"
#include "mcfse/report.hpp"
#include "mcfse/synthetic.hpp"
#include "mcfse/video.hpp"
#include "mcfse/volume.hpp"
