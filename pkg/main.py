#!/usr/bin/env python3
"""
Convex representation experiments - main entry point
Conjugates, J-transform, Fitzpatrick / sigma_T, fixed-point residuals and enlargement audits
"""

import logging
import sys
from pathlib import Path

# 确保正确的导入路径
sys.path.insert(0, str(Path(__file__).parent))

from convrep_analysis.cli import run

# 设置日志
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main() -> int:
    """
    Examples:
        python main.py suite --list
        python main.py suite fy-fixed-point --out outputs/experiments
        python main.py conjugate --f quad.json --grid grid.json
        python main.py verify --h h.json --T t.json
    """
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
