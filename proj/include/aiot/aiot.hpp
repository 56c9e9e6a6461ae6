#pragma once

#include "aiot/bitstream.hpp"
#include "aiot/digital_cal.hpp"
#include "aiot/fft.hpp"
#include "aiot/iffilter.hpp"
#include "aiot/linecodec.hpp"
#include "aiot/loloop.hpp"
#include "aiot/records.hpp"
#include "aiot/rffe.hpp"
#include "aiot/rxctrl.hpp"
#include "aiot/sigcore.hpp"
