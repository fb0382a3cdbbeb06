# -*- coding: utf-8 -*-
"""数值核心：核函数、积分引擎、穷竭函数、函数模型、测度与范数"""
