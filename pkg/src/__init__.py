"""
RPM-RIS Cell-Free
RIS 反射圖樣調變輔助的 cell-free massive MIMO 上行模擬函式庫
"""
